"""``recipe-ner``: clean, augment, sample, train, tag, eval and fewshot subcommands.

Exit codes: 0 success, 1 internal error, 2 usage or data error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import augment as aug
from . import cleaning, evaluation, fewshot, sefs
from .corpus import Dataset, Phrase, load_conll, save_conll, tokenize

log = logging.getLogger("recipe_ner")

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Bad flags or bad input data; maps to exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _load(path: str) -> Dataset:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"input file not found: {path}")
    return load_conll(p)


def _writable(path: str) -> Path:
    p = Path(path)
    if not p.parent.exists():
        raise UsageError(f"output directory does not exist: {p.parent}")
    return p


def cmd_clean(args) -> int:
    rules = cleaning.parse_rules(args.rules)
    units = cleaning.load_unit_lexicon(args.unit_lexicon) if args.unit_lexicon else cleaning.DEFAULT_UNITS
    out = _writable(args.out)
    report_path = _writable(args.report) if args.report else None
    ds = _load(args.input)
    cleaned, report = cleaning.clean(ds, rules, units)
    save_conll(cleaned, out)
    if report_path:
        report_path.write_text(report.to_tsv(), encoding="utf-8")
    print(f"phrases\t{len(cleaned)}\nedits\t{report.total}")
    return EXIT_OK


def cmd_augment(args) -> int:
    strategies = [aug.Strategy.parse(s) for s in args.strategies.split(",") if s.strip()]
    if not strategies:
        raise UsageError("no augmentation strategy given")
    lex = None
    if aug.Strategy.SR in strategies:
        if not args.lexicon:
            raise UsageError("SR augmentation needs --lexicon (a path, or 'bundled')")
        lex = aug.SynonymLexicon.load(None if args.lexicon == "bundled" else args.lexicon)
    seed = args.seed if args.seed is not None else args.global_seed
    cfgs = [aug.AugmentConfig(s, p=args.p, copies=args.copies, seed=seed) for s in strategies]
    out = _writable(args.out)
    ds = _load(args.input)
    if not len(ds):
        raise UsageError("cannot augment an empty corpus")
    result = aug.augment_dataset(ds, cfgs, lex)
    save_conll(result, out)
    print(f"phrases\t{len(result)}")
    return EXIT_OK


def cmd_sample(args) -> int:
    if not 0.0 < args.fraction <= 1.0:
        raise UsageError(f"--fraction must be in (0, 1], got {args.fraction}")
    seed = args.seed if args.seed is not None else args.global_seed
    plan = sefs.SamplePlan(args.fraction, seed)
    out = _writable(args.out)
    report_path = _writable(args.report) if args.report else None
    ds = _load(args.input)
    clusters = sefs.cluster(ds)
    chosen = sefs.stratified_sample(clusters, plan)
    sample = ds.subset(chosen)
    save_conll(sample, out)
    skew = sefs.skew_report(clusters)
    if report_path:
        report_path.write_text(skew.to_tsv(), encoding="utf-8")
    print(f"clusters\t{len(clusters)}\nk50\t{skew.k50}\nk90\t{skew.k90}\nphrases\t{len(sample)}")
    return EXIT_OK


def cmd_train(args) -> int:
    from .crf import FeatureTemplateSet, TrainOptions, save_model, token_accuracy, train

    try:
        templates = FeatureTemplateSet.parse(args.templates)
        opts = TrainOptions(sigma=args.sigma, max_iterations=args.max_iter,
                            tolerance=args.tol, seed=args.global_seed)
    except ValueError as e:
        raise UsageError(str(e)) from None
    model_path = _writable(args.model)
    ds = _load(args.input)
    if not len(ds):
        raise UsageError("cannot train on an empty corpus")
    model = train(ds, templates, opts)
    save_model(model, model_path)
    print(f"features\t{model.num_features}\niterations\t{len(model.history) - 1}\n"
          f"train_accuracy\t{100 * token_accuracy(model, ds):.2f}")
    return EXIT_OK


def _read_raw(path: str) -> Dataset:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"input file not found: {path}")
    phrases = []
    for line in p.read_text(encoding="utf-8").splitlines():
        toks = tokenize(line)
        if toks:
            phrases.append(Phrase.untagged(toks, id=str(len(phrases))))
    return Dataset(tuple(phrases), name=p.stem)


def cmd_tag(args) -> int:
    from .crf import ModelFormatError, load_model, tag_dataset

    if not Path(args.model).is_file():
        raise UsageError(f"model file not found: {args.model}")
    try:
        model = load_model(args.model)
    except ModelFormatError as e:
        raise UsageError(f"{args.model}: {e}") from None
    out = _writable(args.out)
    ds = _read_raw(args.input) if args.raw else _load(args.input)
    save_conll(tag_dataset(model, ds), out)
    print(f"phrases\t{len(ds)}")
    return EXIT_OK


def cmd_eval(args) -> int:
    gold, pred = _load(args.gold), _load(args.pred)
    try:
        if args.by_source:
            reports = evaluation.evaluate_by_source(gold, pred, args.include_outside)
        else:
            reports = {"all": evaluation.evaluate(gold, pred, args.include_outside)}
    except evaluation.AlignmentError as e:
        raise UsageError(str(e)) from None
    main = reports["all"]
    print("source\tF1 (%)\tP (%)\tR (%)\tMicro-F1 (%)")
    for name, r in reports.items():
        print(f"{name}\t{r.table_row()}\t{100 * r.micro_f1:.2f}")
    if args.report:
        _writable(args.report).write_text(main.per_tag_tsv() + "\n" + main.confusion.to_tsv(),
                                          encoding="utf-8")
    if args.errors:
        patterns = evaluation.error_patterns(main.confusion, gold, pred, top_k=args.errors)
        sys.stdout.write(evaluation.error_patterns_tsv(patterns))
    return EXIT_OK


def cmd_fewshot(args) -> int:
    if bool(args.canned) == bool(args.endpoint):
        raise UsageError("give exactly one of --canned DIR or --endpoint URL")
    ds = _load(args.input)
    if not len(ds):
        raise UsageError("evaluation corpus is empty")
    template = (fewshot.PromptTemplate.from_file(args.template, k=args.k) if args.template
                else fewshot.PromptTemplate(k=args.k))
    seed = args.seed if args.seed is not None else args.global_seed
    exemplars: list[Phrase] = []
    if args.k:
        if not args.exemplars:
            raise UsageError("--k > 0 needs --exemplars (a tagged training corpus)")
        try:
            exemplars = fewshot.select_exemplars(_load(args.exemplars), args.k, seed)
        except ValueError as e:
            raise UsageError(str(e)) from None
    if args.canned:
        try:
            transport = fewshot.CannedStore(args.canned)
        except FileNotFoundError as e:
            raise UsageError(str(e)) from None
    else:
        transport = fewshot.ChatCompletionTransport(fewshot.TransportConfig(
            args.endpoint, args.model_name, timeout=args.timeout, max_retries=args.retries))
    result = fewshot.run_fewshot_eval(ds, template, transport, exemplars, args.max_in_flight)
    if args.out:
        save_conll(result.predictions, _writable(args.out))
    r = result.report
    print("Macro-F1 (%)\tMicro-F1 (%)\ttransport_failures")
    print(f"{100 * r.macro_f1:.2f}\t{100 * r.micro_f1:.2f}\t{result.failures}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="recipe-ner", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", dest="global_seed", type=int, default=0,
                        help="default seed for every subcommand (default 0)")
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="log more (-vv for debug output)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("clean", help="apply cleaning rules to a tagged corpus")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--rules", default="all",
                   help="'all', 'none' or comma list of: " + ", ".join(cleaning.RULE_ORDER))
    p.add_argument("--report", help="write per-rule edit counts (TSV)")
    p.add_argument("--unit-lexicon", help="unit lexicon file (one stem per line)")
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("augment", help="write original + augmented corpus")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--strategies", default="lwtr,sr,sis", help="comma list of lwtr, sr, sis")
    p.add_argument("--p", type=float, default=aug.DEFAULT_P, help="per-item probability")
    p.add_argument("--copies", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--lexicon", help="synonym lexicon path, or 'bundled'")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("sample", help="stratified entity frequency sampling")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--fraction", type=float, default=0.25)
    p.add_argument("--seed", type=int)
    p.add_argument("--report", help="write the cluster skew table (TSV)")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("train", help="train a CRF tagger")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--model", required=True, help="output model file")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--templates", default="all", help="comma list of feature templates")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("tag", help="tag a corpus with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--raw", action="store_true", help="input is raw text, one phrase per line")
    p.set_defaults(func=cmd_tag)

    p = sub.add_parser("eval", help="score predictions against gold")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--include-outside", action="store_true", help="score O like an entity tag")
    p.add_argument("--by-source", action="store_true", help="one row per gold source label")
    p.add_argument("--report", help="write per-tag metrics and confusion matrix (TSV)")
    p.add_argument("--errors", type=int, default=0, metavar="K", help="print top-K error patterns")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("fewshot", help="few-shot LLM tagging and scoring")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--exemplars", help="tagged corpus to draw exemplars from")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--template", help="prompt template file")
    p.add_argument("--canned", help="directory of <phrase-id>.txt responses")
    p.add_argument("--endpoint", help="chat-completion URL")
    p.add_argument("--model-name", default="llama2-7b")
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--retries", type=int, default=2)
    p.add_argument("--max-in-flight", type=int, default=4)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="write predicted tags")
    p.set_defaults(func=cmd_fewshot)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    # CorpusFormatError, UnknownRuleError and bad option values are ValueErrors
    except (UsageError, ValueError) as e:
        print(f"recipe-ner: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:  # --help
        return int(e.code or 0)
    except Exception:
        log.exception("internal error")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
