"""Acceptance criteria, one test each.

Every test records a ``PASS``/``FAIL``/``NOT RUNNABLE`` line that is printed in
the terminal summary. Criteria 7 and 8 need corpora that are not bundled; point
``RECIPE_NER_MANUAL_TRAIN`` / ``RECIPE_NER_MANUAL_TEST`` (CoNLL files) and
``RECIPE_NER_MACHINE_CORPUS`` at them to run those two.
"""

from __future__ import annotations

import contextlib
import math
import os
import subprocess
import sys
import time
from collections import defaultdict
from pathlib import Path

import numpy as np
import pytest

from recipe_ner.augment import (
    AugmentConfig, Strategy, SynonymLexicon, augment_dataset, build_label_index, lwtr, segments,
    shuffle_within_segments, synonym_replace,
)
from recipe_ner.corpus import ENTITY_TAGS, NUM_TAGS, Dataset, Phrase, Tag, Token, load_conll, save_conll
from recipe_ner.crf.model import log_partition, tag_dataset, viterbi
from recipe_ner.crf.train import TrainOptions, compile_corpus, objective, token_accuracy, train
from recipe_ner.evaluation import evaluate
from recipe_ner.fewshot import CannedStore, PromptTemplate, parse_response, run_fewshot_eval
from recipe_ner.sefs import SamplePlan, cluster, skew_report, stratified_sample
from recipe_ner.synth import random_tagged_phrase, synthetic_corpus

from .conftest import ACCEPTANCE_LINES
from .oracles import brute_argmax, brute_log_partition, central_difference, random_model


@contextlib.contextmanager
def criterion(number: int, title: str):
    t0 = time.perf_counter()
    details: list[str] = []
    try:
        yield details
    except pytest.skip.Exception:
        ACCEPTANCE_LINES.append(f"[NOT RUNNABLE] {number:>2}. {title}")
        raise
    except BaseException:
        ACCEPTANCE_LINES.append(f"[FAIL] {number:>2}. {title} ({time.perf_counter() - t0:.2f}s)"
                                + ("; " + "; ".join(details) if details else ""))
        raise
    ACCEPTANCE_LINES.append(f"[PASS] {number:>2}. {title} ({time.perf_counter() - t0:.2f}s)"
                            + ("; " + "; ".join(details) if details else ""))
    print(ACCEPTANCE_LINES[-1])


def gen(seed):
    return np.random.Generator(np.random.PCG64(seed))


def test_c01_inference_exactness():
    with criterion(1, "Viterbi and log-partition equal exhaustive enumeration") as d:
        g = gen(101)
        phrases = []
        for _ in range(200):
            n = int(g.integers(1, 6))
            phrases.append(random_tagged_phrase(g, max_len=n, vocab_size=6).texts[:n])
        model = random_model(g, phrases, ("word", "suffix2", "shape", "prev-word", "next-word"))
        t0 = time.perf_counter()
        worst = 0.0
        for texts in phrases:
            assert [t.index for t in viterbi(model, texts)] == brute_argmax(model, texts)
            worst = max(worst, abs(log_partition(model, texts) - brute_log_partition(model, texts)))
        elapsed = time.perf_counter() - t0
        d.append(f"max |dlogZ| = {worst:.1e}")
        assert worst < 1e-9
        assert elapsed < 5.0


def test_c02_gradient_check():
    with criterion(2, "analytic gradient matches central differences") as d:
        t0 = time.perf_counter()
        g = gen(202)
        ds = Dataset(tuple(random_tagged_phrase(g, max_len=5, id=str(i), vocab_size=2)
                           for i in range(5)))
        corpus = compile_corpus(ds, ("word",))
        n = corpus.num_attributes * NUM_TAGS + NUM_TAGS + NUM_TAGS ** 2
        assert n <= 200
        theta = g.uniform(-1, 1, n)
        _, grad = objective(theta, corpus, 1.0)
        num = central_difference(lambda th: objective(th, corpus, 1.0)[0], theta, h=1e-5)
        rel = np.abs(grad - num) / np.maximum(np.maximum(np.abs(grad), np.abs(num)), 1e-8)
        d.append(f"{n} features, max rel err = {rel.max():.1e}")
        assert rel.max() < 1e-4
        assert time.perf_counter() - t0 < 10.0


def test_c03_separable_training():
    with criterion(3, "separable corpus reaches 100% training accuracy") as d:
        t0 = time.perf_counter()
        ds = synthetic_corpus(50, seed=303)
        tags_of = defaultdict(set)
        for p in ds:
            for tok in p.tokens:
                tags_of[tok.text].add(tok.tag)
        assert all(len(v) == 1 for v in tags_of.values())
        model = train(ds, opts=TrainOptions(max_iterations=100))
        acc = token_accuracy(model, ds)
        d.append(f"{len(model.history) - 1} iterations, accuracy {100 * acc:.2f}%")
        assert len(model.history) - 1 <= 100
        assert acc == 1.0
        assert time.perf_counter() - t0 < 10.0


def test_c04_augmentation_invariants(tmp_path):
    with criterion(4, "augmentation invariants on 1,000 random phrases"):
        g = gen(404)
        ds = Dataset(tuple(random_tagged_phrase(g, max_len=10, id=str(i), vocab_size=5)
                           for i in range(1000)))
        index = build_label_index(ds)
        lex = SynonymLexicon({f"{t.value.lower()}{i}": [f"alt{i}", f"two words{i}"]
                              for t in Tag for i in range(0, 5, 2)})
        for k, p in enumerate(ds):
            rng = gen(k)
            out = lwtr(p, index, AugmentConfig(Strategy.LWTR, p=0.5), rng)
            assert out.tags == p.tags
            out = shuffle_within_segments(p, AugmentConfig(Strategy.SIS, p=0.5), rng)
            assert out.tags == p.tags
            for s, e in segments(p.tags):
                assert sorted(out.texts[s:e]) == sorted(p.texts[s:e])
            assert lwtr(p, index, AugmentConfig(Strategy.LWTR, p=0.0), rng) == p
            assert synonym_replace(p, lex, AugmentConfig(Strategy.SR, p=0.0), rng) == p
            assert shuffle_within_segments(p, AugmentConfig(Strategy.SIS, p=0.0), rng) == p

        cfgs = [AugmentConfig(s, p=0.4, seed=2024) for s in Strategy]
        a, b = tmp_path / "a.conll", tmp_path / "b.conll"
        save_conll(augment_dataset(ds, cfgs, lex), a)
        save_conll(augment_dataset(ds, cfgs, lex), b)
        assert a.read_bytes() == b.read_bytes()


def test_c05_sefs_contracts():
    with criterion(5, "SEFS clustering and ceiling-quota sampling") as d:
        g = gen(505)
        vectors: set[tuple[int, ...]] = set()
        while len(vectors) < 20:
            vectors.add(tuple(int(x) for x in g.integers(0, 3, size=7)))
        phrases = []
        for vec in sorted(vectors):
            for _ in range(int(g.integers(1, 40))):
                toks = [Token(f"{t.value.lower()}{j}", t) for t, c in zip(ENTITY_TAGS, vec)
                        for j in range(c)] + [Token("and", Tag.O)]
                phrases.append(toks)
        order = g.permutation(len(phrases))
        ds = Dataset(tuple(Phrase(tuple(phrases[i]), id=str(k)) for k, i in enumerate(order)))
        cs = cluster(ds)
        assert len(cs) == 20
        plan = SamplePlan(0.25, seed=7)
        chosen = stratified_sample(cs, plan)
        for c in cs:
            assert len(chosen & set(c.members)) == math.ceil(0.25 * len(c))
        N = len(ds)
        d.append(f"N={N}, sample={len(chosen)}")
        assert 0.25 * N <= len(chosen) <= 0.25 * N + 20
        assert stratified_sample(cluster(ds), plan) == chosen


def test_c06_macro_f1_is_not_harmonic_mean():
    with criterion(6, "macro-F1 = 0.6667 while harmonic(macro-P, macro-R) = 0.75") as d:
        def ds_of(tags):
            return Dataset((Phrase(tuple(Token(f"w{i}", t) for i, t in enumerate(tags)), id="0"),))
        rep = evaluate(ds_of([Tag.NAME, Tag.NAME, Tag.UNIT]), ds_of([Tag.NAME, Tag.UNIT, Tag.UNIT]))
        assert rep.macro_precision == rep.macro_recall == 0.75
        harmonic = 2 * rep.macro_precision * rep.macro_recall / (rep.macro_precision + rep.macro_recall)
        d.append(f"macro-F1 {rep.macro_f1:.4f}, harmonic {harmonic:.4f}")
        assert round(rep.macro_f1, 4) == 0.6667
        assert rep.macro_f1 != pytest.approx(harmonic)


def test_c07_manual_split_reproduction():
    with criterion(7, "CRF macro-F1 >= 92.0 on the 6,611/2,187 manual split") as d:
        train_path = os.environ.get("RECIPE_NER_MANUAL_TRAIN")
        test_path = os.environ.get("RECIPE_NER_MANUAL_TEST")
        if not (train_path and test_path):
            pytest.skip("manual-annotation split not supplied "
                        "(set RECIPE_NER_MANUAL_TRAIN and RECIPE_NER_MANUAL_TEST)")
        train_ds, test_ds = load_conll(train_path), load_conll(test_path)
        model = train(train_ds)
        rep = evaluate(test_ds, tag_dataset(model, test_ds))
        d.append(f"macro-F1 {100 * rep.macro_f1:.2f}")
        assert 100 * rep.macro_f1 >= 92.0


def test_c08_machine_corpus_statistics():
    with criterion(8, "SEFS statistics of the 349,762-phrase machine-annotated corpus") as d:
        path = os.environ.get("RECIPE_NER_MACHINE_CORPUS")
        if not path:
            pytest.skip("machine-annotated corpus not supplied (set RECIPE_NER_MACHINE_CORPUS)")
        ds = load_conll(path)
        cs = cluster(ds)
        rep = skew_report(cs)
        size = len(stratified_sample(cs, SamplePlan(0.25, seed=0)))
        d.append(f"clusters {len(cs)}, k50 {rep.k50}, k90 {rep.k90}, sample {size}")
        assert len(cs) == 2067 and rep.k50 == 11 and rep.k90 == 91
        assert 87441 <= size <= 89508


def _fuzz_response(g, query):
    junk = ["", "/", "//", "NAME", "/NAME", "x/", "\n", "\t", "```", "*", "ünï/cödé", "1/2/",
            "/QUANTITY/", "TAG:", "null", "{\"a\": 1}", "\x00", "O/O/O", "-RRB-/UNIT"]
    parts = []
    for _ in range(int(g.integers(0, 12))):
        r = g.random()
        if r < 0.3 and query:
            w = query[int(g.integers(len(query)))]
            parts.append(f"{w}/{['name', 'UNIT', 'Quant', 'OTHER', 'df', ''][int(g.integers(6))]}")
        elif r < 0.7:
            parts.append(junk[int(g.integers(len(junk)))])
        else:
            parts.append("".join(chr(int(c)) for c in g.integers(1, 0x2FFF, size=int(g.integers(1, 8)))))
    return ("\n" if g.random() < 0.5 else " ").join(parts)


def test_c09_fewshot_harness(tmp_path):
    with criterion(9, "few-shot harness: echo 100.00, empty 0.00, parser total on 500 fuzzed responses") as d:
        ds = synthetic_corpus(60, seed=909)
        echo = CannedStore.write_echo(ds, tmp_path / "echo")
        res = run_fewshot_eval(ds, PromptTemplate(k=0), echo)
        assert f"{100 * res.report.macro_f1:.2f}" == "100.00"
        empty_dir = tmp_path / "empty"
        empty_dir.mkdir()
        for p in ds:
            (empty_dir / f"{p.id}.txt").write_text("")
        res = run_fewshot_eval(ds, PromptTemplate(k=0), CannedStore(empty_dir))
        assert f"{100 * res.report.micro_f1:.2f}" == "0.00"
        g = gen(910)
        for i in range(500):
            query = ds[i % len(ds)].texts
            out = parse_response(_fuzz_response(g, query), query)
            assert len(out) == len(query)
        d.append("500/500 fuzzed responses length-preserving")


def test_c10_end_to_end_cli(tmp_path, fixtures_dir):
    with criterion(10, "clean -> augment -> sample -> train -> tag -> eval via the CLI") as d:
        t0 = time.perf_counter()
        cli = [sys.executable, "-m", "recipe_ner", "--seed", "7"]
        w = Path(tmp_path)
        steps = [
            ["clean", "--in", fixtures_dir / "train.conll", "--out", w / "clean.conll",
             "--report", w / "clean.tsv"],
            ["augment", "--in", w / "clean.conll", "--out", w / "aug.conll",
             "--strategies", "lwtr,sr,sis", "--lexicon", "bundled"],
            ["sample", "--in", w / "aug.conll", "--out", w / "sample.conll",
             "--fraction", "0.25", "--report", w / "skew.tsv"],
            ["train", "--in", w / "sample.conll", "--model", w / "model.crf"],
            ["tag", "--model", w / "model.crf", "--in", fixtures_dir / "test.conll",
             "--out", w / "pred.conll"],
            ["eval", "--gold", fixtures_dir / "test.conll", "--pred", w / "pred.conll",
             "--by-source"],
        ]
        out = ""
        for step in steps:
            r = subprocess.run(cli + [str(a) for a in step], capture_output=True, text=True)
            assert r.returncode == 0, f"{step[0]} exited {r.returncode}: {r.stderr}"
            out = r.stdout
        elapsed = time.perf_counter() - t0
        rows = out.splitlines()
        assert rows[0] == "source\tF1 (%)\tP (%)\tR (%)\tMicro-F1 (%)"
        all_row = next(r for r in rows if r.startswith("all\t"))
        fields = all_row.split("\t")[1:]
        assert len(fields) == 4 and all(len(f.split(".")[1]) == 2 for f in fields)
        d.append("F1/P/R " + "/".join(fields[:3]) + f", total {elapsed:.1f}s")
        assert elapsed < 60.0
