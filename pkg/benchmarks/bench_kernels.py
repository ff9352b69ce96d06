"""Compare the numpy and numba kernel backends at scenario scale.

    python3 benchmarks/bench_kernels.py [--length 10000] [--repeat 5]

Prints the best-of-N wall time per kernel and the speed-up, then checks
that both backends agree on the outputs.
"""

import argparse
import timeit
from contextlib import contextmanager

import numpy as np

from hmgame import hmm, kernels
from hmgame.experiments import AGGRESSIVE_TRANSITIONS, tennis_hmg
from hmgame.hmg import to_hmm

KERNELS = ("forward", "backward", "transition_counts", "sample_path")


@contextmanager
def use_backend(mod):
    saved = {name: getattr(kernels, name) for name in KERNELS}
    for name in KERNELS:
        setattr(kernels, name, getattr(mod, name))
    try:
        yield
    finally:
        for name, fn in saved.items():
            setattr(kernels, name, fn)


def cases(model, length):
    A, B, pi = (np.ascontiguousarray(m) for m in (model.transitions, model.emissions, model.initial))
    obs, _ = hmm.sample(model, length, seed=1)
    rng = np.random.default_rng(2)
    u_state, u_obs = rng.random(length), rng.random(length)
    cdfs = (np.cumsum(pi), np.cumsum(A, axis=1), np.cumsum(B, axis=1))

    def make(backend):
        alpha, scale = backend.forward(A, B, pi, obs)
        beta = backend.backward(A, B, obs, scale)
        return {
            "forward": lambda: backend.forward(A, B, pi, obs),
            "backward": lambda: backend.backward(A, B, obs, scale),
            "transition_counts": lambda: backend.transition_counts(A, B, obs, alpha, beta, scale),
            "sample_path": lambda: backend.sample_path(*cdfs, u_state, u_obs),
        }

    return obs, make


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--length", type=int, default=10_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    if kernels.numba_backend is None:
        raise SystemExit("numba is not importable; nothing to compare")

    hmg = tennis_hmg()
    model = to_hmm(hmg, np.array(AGGRESSIVE_TRANSITIONS))
    obs, make = cases(model, args.length)
    backends = {"numpy": kernels.numpy_backend, "numba": kernels.numba_backend}
    fns = {name: make(mod) for name, mod in backends.items()}  # also triggers JIT compilation

    cfg = hmm.TrainingConfig(max_iterations=20, log_likelihood_tolerance=1e-300, clamp_emissions=True)
    start = to_hmm(hmg)

    def train(mod):
        def run():
            with use_backend(mod):
                return hmm.baum_welch(obs, 3, start, cfg)

        return run

    for name, mod in backends.items():
        fns[name]["baum_welch x20"] = train(mod)
    train(kernels.numba_backend)()

    print(f"T = {args.length}, best of {args.repeat}")
    print(f"{'kernel':<20}{'numpy ms':>12}{'numba ms':>12}{'speed-up':>10}")
    for kernel in fns["numpy"]:
        t = {b: min(timeit.repeat(fns[b][kernel], number=1, repeat=args.repeat)) * 1e3 for b in backends}
        print(f"{kernel:<20}{t['numpy']:>12.3f}{t['numba']:>12.3f}{t['numpy'] / t['numba']:>9.1f}x")

    for kernel in KERNELS:
        a, b = fns["numpy"][kernel](), fns["numba"][kernel]()
        a, b = (a, b) if isinstance(a, tuple) else ((a,), (b,))
        worst = max(float(np.max(np.abs(np.asarray(x, float) - np.asarray(y, float)))) for x, y in zip(a, b))
        print(f"agreement {kernel}: max |numpy - numba| = {worst:.1e}")


if __name__ == "__main__":
    main()
