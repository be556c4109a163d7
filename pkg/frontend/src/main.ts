import { ApiClient } from "./api.js";
import { SupervisorConsole } from "./console.js";

const params = new URLSearchParams(window.location.search);
const base = params.get("api") ?? "http://127.0.0.1:8000";
const root = document.getElementById("console");
if (root === null) {
  throw new Error("missing #console mount point");
}
const app = new SupervisorConsole(new ApiClient(base), root, params.get("supervisor") ?? "console");
void app.init();
