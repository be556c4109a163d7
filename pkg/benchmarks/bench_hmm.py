"""Compare the compiled hidden-state kernels against the numpy fallback.

The expectation-accumulation pass dominates fitting time, so the benchmark
times exactly that on a synthetic corpus, once per implementation, plus an
end-to-end fit through whichever kernel is selected at import.

Usage: python benchmarks/bench_hmm.py [--states N] [--symbols V]
                                      [--sequences S] [--length T]
"""

import argparse
import time

import numpy as np

from skillchain.chaining._kernels import _hmm_np, kernel_backend

try:
    from skillchain.chaining._kernels import _hmm_cy
except ImportError:
    _hmm_cy = None


def make_case(rng, n, v, n_seqs, T):
    pi = rng.dirichlet(np.ones(n))
    a = rng.dirichlet(np.ones(n), size=n)
    b = rng.dirichlet(np.ones(v), size=n)
    seqs = [rng.integers(0, v, size=T).astype(np.int32) for _ in range(n_seqs)]
    return pi, a, b, seqs


def time_impl(impl, pi, a, b, seqs, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for obs in seqs:
            impl.sequence_stats(pi, a, b, obs)
        best = min(best, time.perf_counter() - t0)
    return best


def time_fit(n, v, seqs_tokens):
    from skillchain.chaining import hmm_fit
    from skillchain.ingest import Corpus

    corpus = Corpus.from_token_lists(seqs_tokens)
    t0 = time.perf_counter()
    hmm_fit(corpus, n_states=n, max_iters=10, seed=0)
    return time.perf_counter() - t0


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--states", type=int, default=8)
    parser.add_argument("--symbols", type=int, default=24)
    parser.add_argument("--sequences", type=int, default=400)
    parser.add_argument("--length", type=int, default=60)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    pi, a, b, seqs = make_case(rng, args.states, args.symbols, args.sequences, args.length)

    print(
        f"sequence_stats over {args.sequences} sequences "
        f"(n={args.states}, |V|={args.symbols}, T={args.length})"
    )
    t_np = time_impl(_hmm_np, pi, a, b, seqs)
    print(f"  numpy   : {t_np * 1e3:9.2f} ms")
    if _hmm_cy is not None:
        t_cy = time_impl(_hmm_cy, pi, a, b, seqs)
        print(f"  cython  : {t_cy * 1e3:9.2f} ms")
        print(f"  speedup : {t_np / t_cy:9.2f}x")
        parity = np.allclose(
            _hmm_cy.sequence_stats(pi, a, b, seqs[0])[2],
            _hmm_np.sequence_stats(pi, a, b, seqs[0])[2],
            rtol=1e-12,
        )
        print(f"  parity  : {'ok' if parity else 'MISMATCH'}")
    else:
        print("  cython  : not built (pip install -e . rebuilds it)")

    tokens = [chr(ord('a') + k) for k in range(args.symbols)]
    seqs_tokens = [[tokens[i] for i in obs] for obs in seqs[:100]]
    print(f"\nhmm_fit, 10 iterations, selected kernels = {kernel_backend()}")
    print(f"  fit     : {time_fit(args.states, args.symbols, seqs_tokens) * 1e3:9.2f} ms")


if __name__ == "__main__":
    main()
