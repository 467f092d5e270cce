"""Compare the numba and numpy CRF kernels on a synthetic corpus.

    python3 benchmarks/bench_crf.py [--phrases 2000] [--repeat 5]

Times one objective/gradient evaluation over the whole corpus and Viterbi
decoding of every phrase, per backend, after a warm-up call (so numba compile
time is excluded; it is reported separately).
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from recipe_ner.corpus import NUM_TAGS
from recipe_ner.crf import _kernels
from recipe_ner.crf.train import compile_corpus
from recipe_ner.synth import synthetic_corpus


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--phrases", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    corpus = compile_corpus(synthetic_corpus(args.phrases, seed=args.seed))
    n_attr = corpus.num_attributes
    rng = np.random.Generator(np.random.PCG64(args.seed))
    theta = rng.normal(scale=0.1, size=n_attr * NUM_TAGS + NUM_TAGS + NUM_TAGS ** 2)
    W = theta[: n_attr * NUM_TAGS].reshape(n_attr, NUM_TAGS)
    start = theta[n_attr * NUM_TAGS: n_attr * NUM_TAGS + NUM_TAGS]
    trans = theta[n_attr * NUM_TAGS + NUM_TAGS:].reshape(NUM_TAGS, NUM_TAGS)
    grad_args = (theta, n_attr, NUM_TAGS, corpus.attr_idx, corpus.pos_ptr, corpus.seq_ptr, corpus.labels)
    bounds = list(zip(corpus.seq_ptr[:-1], corpus.seq_ptr[1:]))

    backends = {"numpy": (_kernels.np_nll_grad, _kernels.np_emissions, _kernels.np_viterbi)}
    if _kernels.HAVE_NUMBA:
        backends["numba"] = (_kernels.nb_nll_grad, _kernels.nb_emissions, _kernels.nb_viterbi)
    else:
        print("numba not installed: timing the numpy backend only")

    print(f"{args.phrases} phrases, {len(corpus.labels)} tokens, {theta.size} parameters")
    print("backend\twarmup_s\tnll_grad_s\tviterbi_all_s")
    results = {}
    for name, (nll_grad, emissions, vit) in backends.items():
        def decode_all():
            for p0, p1 in bounds:
                vit(emissions(W, corpus.attr_idx, corpus.pos_ptr, p0, p1), start, trans)

        t0 = time.perf_counter()
        nll_grad(*grad_args)
        decode_all()
        warm = time.perf_counter() - t0
        g = best_of(lambda: nll_grad(*grad_args), args.repeat)
        v = best_of(decode_all, args.repeat)
        results[name] = (g, v)
        print(f"{name}\t{warm:.3f}\t{g:.4f}\t{v:.4f}")

    if "numba" in results:
        (gn, vn), (gb, vb) = results["numpy"], results["numba"]
        f1, _ = _kernels.np_nll_grad(*grad_args)
        f2, _ = _kernels.nb_nll_grad(*grad_args)
        print(f"speedup\tnll_grad x{gn / gb:.1f}\tviterbi x{vn / vb:.1f}\t|dNLL| {abs(f1 - f2):.1e}")


if __name__ == "__main__":
    main()
