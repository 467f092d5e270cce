import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from recipe_ner.corpus import ENTITY_TAGS, TAGS, Dataset, Phrase, Tag, Token
from recipe_ner.evaluation import (
    AlignmentError, ConfusionMatrix, confusion, error_patterns, error_patterns_tsv, evaluate,
    evaluate_by_source, learnability_curve, learnability_tsv, macro_f1, micro_f1, per_tag_prf,
    report_from_confusion,
)

from .conftest import P

N, Q, U, ST, O = Tag.NAME, Tag.QUANTITY, Tag.UNIT, Tag.STATE, Tag.O


def ds_of(*tag_lists, source=None):
    return Dataset(tuple(Phrase(tuple(Token(f"w{j}", t) for j, t in enumerate(tags)),
                                id=str(i), source=source) for i, tags in enumerate(tag_lists)))


def test_confusion_examples():
    gold = ds_of([Q, U, N], [N, O])
    cm = confusion(gold, gold)
    assert np.count_nonzero(cm.counts - np.diag(np.diag(cm.counts))) == 0
    assert cm.total == gold.num_tokens
    cm = confusion(ds_of([ST]), ds_of([N]))
    assert cm[ST, N] == 1 and cm.total == 1


def test_alignment_errors_name_the_phrase():
    with pytest.raises(AlignmentError) as e:
        confusion(ds_of([N], [N, N]), ds_of([N], [N]))
    assert e.value.phrase_id == "1" and "phrase 1" in str(e.value)
    gold = Dataset((P("salt/NAME", id="7"),))
    with pytest.raises(AlignmentError, match="phrase 7"):
        confusion(gold, Dataset((P("sugar/NAME", id="7"),)))
    with pytest.raises(AlignmentError):
        confusion(gold, Dataset(()))


def test_per_tag_examples():
    prf = per_tag_prf(confusion(ds_of([N, N]), ds_of([N, O])))
    assert (prf[N].precision, prf[N].recall) == (1.0, 0.5)
    assert prf[N].f1 == pytest.approx(2 / 3)
    assert prf[Tag.TEMP].f1 == 0.0  # 0/0 convention


def test_absent_tags_are_not_averaged():
    rep = evaluate(ds_of([N, Q]), ds_of([N, Q]))
    assert rep.macro_f1 == 1.0
    assert macro_f1(rep.per_tag, [N, U]) == 0.5


def test_macro_f1_is_not_harmonic_mean():
    gold, pred = ds_of([N, N, U]), ds_of([N, U, U])
    rep = evaluate(gold, pred)
    assert rep.per_tag[N].f1 == pytest.approx(2 / 3) and rep.per_tag[U].f1 == pytest.approx(2 / 3)
    assert rep.macro_precision == rep.macro_recall == 0.75
    harmonic = 2 * rep.macro_precision * rep.macro_recall / (rep.macro_precision + rep.macro_recall)
    assert round(rep.macro_f1, 4) == 0.6667 and harmonic == 0.75


def test_micro_examples():
    assert micro_f1(confusion(ds_of([N, Q]), ds_of([N, Q]))) == 1.0
    assert micro_f1(confusion(ds_of([N, Q]), ds_of([O, O]))) == 0.0
    assert micro_f1(confusion(ds_of([N, Q, U]), ds_of([N, Q, N]))) == pytest.approx(2 / 3)


def test_include_outside_flag():
    gold, pred = ds_of([N, O, O]), ds_of([N, O, N])
    assert evaluate(gold, pred).macro_f1 == pytest.approx(2 / 3)
    with_o = evaluate(gold, pred, include_outside=True)
    assert with_o.macro_f1 == pytest.approx((2 / 3 + 2 / 3) / 2)
    assert with_o.micro_f1 == pytest.approx(2 / 3)


def test_error_patterns_ranking():
    gold = ds_of([ST, ST, ST, U, N])
    pred = ds_of([N, N, N, O, N])
    cm = confusion(gold, pred)
    pats = error_patterns(cm, gold, pred, top_k=5)
    assert [(e.gold, e.pred, e.count) for e in pats] == [(ST, N, 3), (U, O, 1)]
    assert pats[0].examples[0] == "[w0] w1 w2 w3 w4"
    assert len(error_patterns(cm, gold, pred, top_k=1)) == 1
    assert error_patterns(confusion(gold, gold), gold, gold) == []
    assert error_patterns_tsv(pats).splitlines()[1].startswith("STATE\tNAME\t3\t")
    with pytest.raises(ValueError):
        error_patterns(cm, gold, pred, top_k=0)


def test_error_examples_capped_at_five():
    gold, pred = ds_of([ST] * 9), ds_of([N] * 9)
    assert len(error_patterns(confusion(gold, pred), gold, pred)[0].examples) == 5


def test_learnability():
    gold = ds_of([Q, U, N])
    epochs = [ds_of([Q, O, O]), ds_of([Q, U, O]), ds_of([Q, U, N])]
    curve = learnability_curve(epochs, gold)
    for tag in (Q, U, N):
        col = [row[tag] for row in curve]
        assert col == sorted(col)
    assert curve[-1][N] == 1.0
    assert learnability_curve([], gold) == []
    assert learnability_tsv([]) == "epoch\n"
    assert learnability_tsv(curve).splitlines()[0].split("\t")[:3] == ["epoch", "NAME", "QUANTITY"]
    with pytest.raises(AlignmentError):
        learnability_curve([ds_of([Q])], gold)


def test_by_source_and_summary():
    gold = Dataset((P("1/QUANTITY", id="0", source="AR"), P("salt/NAME", id="1", source="GK")))
    pred = Dataset((P("1/QUANTITY", id="0"), P("salt/O", id="1")))
    reps = evaluate_by_source(gold, pred)
    assert list(reps) == ["AR", "GK", "all"]
    assert reps["AR"].table_row() == "100.00\t100.00\t100.00"
    assert reps["GK"].table_row() == "0.00\t0.00\t0.00"
    assert "Micro-F1 (%)\t66.67" in reps["all"].summary()


def test_confusion_matrix_checks_and_tsv():
    with pytest.raises(ValueError):
        ConfusionMatrix(np.full((8, 8), -1))
    cm = confusion(ds_of([N]), ds_of([N]))
    assert (cm + cm)[N, N] == 2
    assert cm.to_tsv().splitlines()[1].startswith("NAME\t1\t0")


tag_lists = st.lists(st.lists(st.sampled_from(TAGS), min_size=1, max_size=5), min_size=1, max_size=8)


@st.composite
def gold_pred(draw):
    gold = draw(tag_lists)
    pred = [draw(st.lists(st.sampled_from(TAGS), min_size=len(g), max_size=len(g))) for g in gold]
    return gold, pred


@settings(max_examples=150, deadline=None)
@given(gold_pred(), st.randoms())
def test_metric_invariants(gp, rnd):
    gold, pred = gp
    rep = evaluate(ds_of(*gold), ds_of(*pred))
    for m in rep.per_tag.values():
        assert 0 <= m.precision <= 1 and 0 <= m.recall <= 1 and 0 <= m.f1 <= 1
    assert 0 <= rep.macro_f1 <= 1 and 0 <= rep.micro_f1 <= 1
    assert rep.confusion.total == sum(map(len, gold))
    present = [t for t in ENTITY_TAGS if rep.support[t] > 0]
    assert rep.macro_f1 == pytest.approx(np.mean([rep.per_tag[t].f1 for t in present]) if present else 0.0)

    order = list(range(len(gold)))
    rnd.shuffle(order)
    shuffled = evaluate(ds_of(*[gold[i] for i in order]), ds_of(*[pred[i] for i in order]))
    assert shuffled.macro_f1 == pytest.approx(rep.macro_f1)
    assert shuffled.micro_f1 == pytest.approx(rep.micro_f1)
    assert np.array_equal(shuffled.confusion.counts, rep.confusion.counts)


@settings(max_examples=100, deadline=None)
@given(gold_pred(), st.sampled_from(ENTITY_TAGS))
def test_micro_ignores_which_entity_a_correct_token_carries(gp, new):
    gold, pred = gp
    g2, p2 = [], []
    for gs, ps in zip(gold, pred):
        g2.append([new if a is b and a.is_entity else a for a, b in zip(gs, ps)])
        p2.append([new if a is b and a.is_entity else b for a, b in zip(gs, ps)])
    before = micro_f1(confusion(ds_of(*gold), ds_of(*pred)))
    after = micro_f1(confusion(ds_of(*g2), ds_of(*p2)))
    assert after == pytest.approx(before)


def test_macro_depends_on_which_entity_a_correct_token_carries():
    # same correct/incorrect pattern, but the correct token moves to another tag
    a = report_from_confusion(confusion(ds_of([N, N, U]), ds_of([N, O, U])))
    b = report_from_confusion(confusion(ds_of([N, N, N]), ds_of([N, O, N])))
    assert a.micro_f1 == pytest.approx(b.micro_f1)
    assert a.macro_f1 != pytest.approx(b.macro_f1)
