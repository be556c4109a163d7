/** Click-to-sequence contract: order, undo, disabled submit, break marks. */

import { beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { SupervisorConsole } from "../src/console.js";
import { FakeServer } from "./fake_server.js";

let server: FakeServer;
let app: SupervisorConsole;

beforeEach(async () => {
  server = new FakeServer();
  vi.stubGlobal("fetch", server.fetch);
  document.body.innerHTML = '<div id="root"></div>';
  app = new SupervisorConsole(new ApiClient(""), document.getElementById("root")!);
  await app.init();
});

function click(selector: string): void {
  const node = document.querySelector<HTMLElement>(selector);
  expect(node, selector).not.toBeNull();
  node!.dispatchEvent(new MouseEvent("click", { bubbles: true }));
}

function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}

describe("click-to-sequence", () => {
  it("posts the clicked skills in exactly the click order", async () => {
    for (const name of ["plan", "prepare", "cut", "install"]) {
      click(`button[data-skill="${name}"]`);
    }
    click("#submit");
    await flush();

    const posts = server.sequencePosts();
    expect(posts).toHaveLength(1);
    expect((posts[0] as { body: unknown }).body).toEqual([
      "plan",
      "prepare",
      "cut",
      "install",
    ]);
  });

  it("disables submit with an empty draft and sends nothing", async () => {
    const submit = document.querySelector<HTMLButtonElement>("#submit")!;
    expect(submit.disabled).toBe(true);
    submit.dispatchEvent(new MouseEvent("click", { bubbles: true }));
    await flush();
    expect(server.sequencePosts()).toHaveLength(0);
  });

  it("undo removes the most recent click", async () => {
    click('button[data-skill="plan"]');
    click('button[data-skill="cut"]');
    click("#undo");
    click("#submit");
    await flush();
    expect((server.sequencePosts()[0] as { body: unknown }).body).toEqual(["plan"]);
  });

  it("marks the reported break index on a 422", async () => {
    server.sequenceFailure = { first_break: 1 };
    click('button[data-skill="cut"]');
    click('button[data-skill="prepare"]');
    click("#submit");
    await flush();

    const items = document.querySelectorAll("#draft .draft-item");
    expect(items).toHaveLength(2);
    expect(items[0]!.classList.contains("break")).toBe(false);
    expect(items[1]!.classList.contains("break")).toBe(true);
    expect(document.querySelector("#error")!.textContent).toContain("continuity");
  });

  it("renders a button per library skill", () => {
    const buttons = document.querySelectorAll("#skill-buttons button");
    expect(buttons).toHaveLength(7);
  });

  it("issues no mutating request without a user action", async () => {
    await flush();
    expect(server.mutatingRequests()).toHaveLength(0);
  });
});
