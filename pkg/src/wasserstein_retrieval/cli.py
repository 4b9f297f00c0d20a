"""Command line: ``rank``, ``evaluate`` and ``export-plan``.

Settings come from built-in defaults, then an optional JSON ``--config``
file, then command-line flags (highest precedence).

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .corpus import load_corpus, read_stopwords, write_rejections
from .embeddings import load_embeddings
from .exceptions import DataError, NumericalError
from .retrieval import METHODS, WassersteinRetriever, evaluate, read_golden, summary_table
from .transport import SinkhornConfig, export_plan, sweep, transport
from .weighting import TermWeighter

logger = logging.getLogger("wasserstein_retrieval")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3

DEFAULTS = {
    "query_lang": "l1",
    "target_lang": "l2",
    "query_stopwords": None,
    "target_stopwords": None,
    "method": "entro_wass",
    "weighting": "idf",
    "oov": "levenshtein",
    "oov_threshold": 1,
    "collapse": True,
    "tie_break": "seeded-random",
    "seed": 0,
    "epsilon": 0.1,
    "max_iter": 50,
    "tolerance": 1e-9,
    "stabilized": True,
    "epsilon_scaling": False,
    "distance": "transport",
    "workers": 1,
    "top_k": None,
    "output": None,
    "rejections": None,
    "query_id": None,
    "target_id": None,
    "golden": None,
    "summary": None,
    "timing": False,
    "sweep": None,
    "exact": False,
    "output_dir": ".",
}

REQUIRED = {
    "rank": ("query_corpus", "target_corpus", "query_embeddings", "target_embeddings"),
    "evaluate": ("query_corpus", "target_corpus", "query_embeddings", "target_embeddings", "golden"),
    "export-plan": ("query_corpus", "target_corpus", "query_embeddings", "target_embeddings",
                    "query_id", "target_id"),
}

PATH_KEYS = ("query_corpus", "target_corpus", "query_embeddings", "target_embeddings",
             "query_stopwords", "target_stopwords", "golden")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    query_corpus: str
    target_corpus: str
    query_embeddings: str
    target_embeddings: str
    query_lang: str = "l1"
    target_lang: str = "l2"
    query_stopwords: str = None
    target_stopwords: str = None
    golden: str = None
    method: str = "entro_wass"
    weighting: str = "idf"
    oov: str = "levenshtein"
    oov_threshold: int = 1
    collapse: bool = True
    tie_break: str = "seeded-random"
    seed: int = 0
    epsilon: float = 0.1
    max_iter: int = 50
    tolerance: float = 1e-9
    stabilized: bool = True
    epsilon_scaling: bool = False
    distance: str = "transport"
    workers: int = 1
    top_k: int = None
    output: str = None
    rejections: str = None
    query_id: list = field(default_factory=list)
    target_id: str = None
    summary: str = None
    timing: bool = False
    sweep: list = None
    exact: bool = False
    output_dir: str = "."

    def validate(self):
        for key in PATH_KEYS:
            path = getattr(self, key)
            if path is not None and not Path(path).is_file():
                raise UsageError(f"{key.replace('_', '-')}: file not found: {path}")
        if self.method not in METHODS:
            raise UsageError(f"unknown method {self.method!r}; valid methods: {', '.join(METHODS)}")
        if not self.epsilon > 0:
            raise UsageError(f"epsilon must be positive, got {self.epsilon}")
        if self.sweep is not None and any(not e > 0 for e in self.sweep):
            raise UsageError("sweep values must be positive")
        if self.workers < 1:
            raise UsageError(f"workers must be >= 1, got {self.workers}")
        if self.top_k is not None and self.top_k < 1:
            raise UsageError(f"top-k must be >= 1, got {self.top_k}")
        if self.oov_threshold < 0:
            raise UsageError("oov-threshold must be non-negative")

    def retriever(self, query_table, target_table):
        return WassersteinRetriever(
            query_table, target_table,
            method=self.method, weighting=self.weighting,
            epsilon=self.epsilon, max_iter=self.max_iter, tol=self.tolerance, stabilized=self.stabilized,
            epsilon_scaling=self.epsilon_scaling,
            distance=self.distance,
            oov=self.oov, oov_threshold=self.oov_threshold, collapse=self.collapse,
            tie_break=self.tie_break, seed=self.seed, n_jobs=self.workers,
        )


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_common(p):
    g = p.add_argument_group("inputs")
    g.add_argument("--config", help="JSON file with settings; flags override it")
    g.add_argument("--query-corpus", help="query corpus, UTF-8 'id<TAB>text' per line")
    g.add_argument("--target-corpus", help="target corpus, same format")
    g.add_argument("--query-embeddings", help="query-language embeddings ('count dim' header)")
    g.add_argument("--target-embeddings", help="target-language embeddings")
    g.add_argument("--query-lang", help="query language tag (default: l1)")
    g.add_argument("--target-lang", help="target language tag (default: l2)")
    g.add_argument("--query-stopwords", help="query-language stopword file, one per line")
    g.add_argument("--target-stopwords", help="target-language stopword file")
    g.add_argument("--rejections", help="write rejected documents as 'id<TAB>reason'")

    m = p.add_argument_group("model")
    m.add_argument("--method", help=f"one of {', '.join(METHODS)} (default: entro_wass)")
    m.add_argument("--weighting", choices=("tf", "idf"), help="histogram weighting (default: idf)")
    m.add_argument("--distance", choices=("transport", "regularized"),
                   help="entro_wass ranking value: <A,P> or <A,P> - eps*H(P) (default: transport)")
    m.add_argument("--epsilon", type=float, help="entropic regularization weight (default: 0.1)")
    m.add_argument("--max-iter", type=int, help="Sinkhorn iteration cap (default: 50)")
    m.add_argument("--tolerance", type=float, help="Sinkhorn marginal tolerance (default: 1e-9)")
    m.add_argument("--stabilized", dest="stabilized", action="store_true",
                   help="log-domain stabilized Sinkhorn (default)")
    m.add_argument("--no-stabilized", dest="stabilized", action="store_false",
                   help="plain Sinkhorn scaling; fails on underflow")
    m.add_argument("--epsilon-scaling", action="store_true",
                   help="warm-start from decreasing epsilons (stabilized solver; helps small epsilon)")

    o = p.add_argument_group("out-of-vocabulary words")
    o.add_argument("--oov", choices=("off", "levenshtein"), help="OOV fallback (default: levenshtein)")
    o.add_argument("--oov-threshold", type=int, help="max edit distance, inclusive (default: 1)")
    o.add_argument("--collapse", dest="collapse", action="store_true",
                   help="share vectors of identically spelled words (default)")
    o.add_argument("--no-collapse", dest="collapse", action="store_false")
    o.add_argument("--tie-break", choices=("lexicographic", "seeded-random"),
                   help="choice among OOV candidates (default: seeded-random)")
    o.add_argument("--seed", type=int, help="seed for every random choice (default: 0)")

    r = p.add_argument_group("run")
    r.add_argument("--workers", type=int, help="parallel workers per query (default: 1)")
    r.add_argument("-v", "--verbose", action="count", help="more logging")


def build_parser():
    parser = _Parser(
        prog="wassret",
        description="Cross-lingual document retrieval with Wasserstein distances.",
        argument_default=argparse.SUPPRESS,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("rank", help="rank target documents for each query",
                       argument_default=argparse.SUPPRESS)
    _add_common(p)
    p.add_argument("--query-id", action="append", help="rank only this query (repeatable)")
    p.add_argument("--top-k", type=int, help="keep the k best targets per query")
    p.add_argument("--output", help="JSON output file (default: stdout)")

    p = sub.add_parser("evaluate", help="rank all queries and report the MRR",
                       argument_default=argparse.SUPPRESS)
    _add_common(p)
    p.add_argument("--golden", help="golden links, 'query_id<TAB>target_id' per line")
    p.add_argument("--top-k", type=int, help="targets listed per query in the report (default: 10)")
    p.add_argument("--output", help="JSON report file")
    p.add_argument("--summary", help="also write a plain-text MRR grid")
    p.add_argument("--timing", action="store_true", help="include wall-clock statistics in the report")

    p = sub.add_parser("export-plan", help="write transport plans of one document pair as CSV",
                       argument_default=argparse.SUPPRESS)
    _add_common(p)
    p.add_argument("--query-id", action="append", help="query document id")
    p.add_argument("--target-id", help="target document id")
    p.add_argument("--sweep", type=_float_list, help="comma-separated epsilons, one CSV each")
    p.add_argument("--exact", action="store_true", help="unregularized plan from the exact solver")
    p.add_argument("--output-dir", help="directory for the CSV files (created if missing)")
    return parser


def resolve_config(args):
    """Merge defaults, the JSON config file and explicit flags."""
    values = dict(DEFAULTS)
    flags = vars(args)
    cfg_path = flags.pop("config", None)
    flags.pop("verbose", None)
    if cfg_path is not None:
        try:
            with open(cfg_path, encoding="utf-8") as fh:
                from_file = json.load(fh)
        except FileNotFoundError:
            raise UsageError(f"config: file not found: {cfg_path}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"config: {cfg_path}: invalid JSON ({exc})") from None
        if not isinstance(from_file, dict):
            raise UsageError(f"config: {cfg_path}: expected a JSON object")
        values.update({k.replace("-", "_"): v for k, v in from_file.items()})
    values.update(flags)
    missing = [k for k in REQUIRED[values["command"]] if values.get(k) is None]
    if missing:
        raise UsageError("missing required settings: " + ", ".join("--" + k.replace("_", "-") for k in missing))
    if isinstance(values.get("query_id"), str):
        values["query_id"] = [values["query_id"]]
    known = set(RunConfig.__dataclass_fields__)
    unknown = sorted(set(values) - known)
    if unknown:
        raise UsageError("unknown settings: " + ", ".join(unknown))
    config = RunConfig(**values)
    config.validate()
    return config


def _load(config):
    q_stop = read_stopwords(config.query_stopwords) if config.query_stopwords else frozenset()
    t_stop = read_stopwords(config.target_stopwords) if config.target_stopwords else frozenset()
    queries = load_corpus(config.query_corpus, config.query_lang, q_stop)
    targets = load_corpus(config.target_corpus, config.target_lang, t_stop)
    if config.rejections:
        write_rejections(list(queries.rejected) + list(targets.rejected), config.rejections)
    q_table = load_embeddings(config.query_embeddings, config.query_lang)
    t_table = load_embeddings(config.target_embeddings, config.target_lang)
    return queries, targets, q_table, t_table


def _write(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text, encoding="utf-8")


def cmd_rank(config):
    queries, targets, q_table, t_table = _load(config)
    if config.query_id:
        try:
            docs = [queries.get(q) for q in config.query_id]
        except KeyError as exc:
            raise DataError(f"unknown query id {exc.args[0]!r}") from None
    else:
        docs = list(queries)
    retriever = config.retriever(q_table, t_table).fit(targets)
    weighter = TermWeighter(config.weighting).fit(queries)
    out = []
    for dist in weighter.transform(docs):
        rl = retriever.rank_distribution(dist)
        entries = rl.entries[: config.top_k] if config.top_k else rl.entries
        out.append({"query_id": rl.query_id, "entries": [[d, x] for d, x in entries]})
    _write(json.dumps({"config": retriever.config(), "rankings": out}, indent=2, sort_keys=True) + "\n",
           config.output)
    return EXIT_OK


def cmd_evaluate(config):
    queries, targets, q_table, t_table = _load(config)
    golden = read_golden(config.golden)
    report = evaluate(queries, targets, golden, config.retriever(q_table, t_table), top_k=config.top_k or 10)
    if config.output:
        _write(report.to_json(include_timing=config.timing), config.output)
    if config.summary:
        label = f"{config.query_lang}->{config.target_lang}"
        _write(summary_table({(f"{config.method}_{config.weighting}", label): report}), config.summary)
    print(f"mrr={report.mrr:.4f}")
    if config.timing:
        print(f"seconds={report.timing['total_seconds']:.3f}", file=sys.stderr)
    return EXIT_OK


def _fmt_eps(eps):
    return f"{eps:g}"


def cmd_export_plan(config):
    queries, targets, q_table, t_table = _load(config)
    if not config.query_id or len(config.query_id) != 1:
        raise UsageError("export-plan needs exactly one --query-id")
    qid, tid = config.query_id[0], config.target_id
    try:
        q_doc, t_doc = queries.get(qid), targets.get(tid)
    except KeyError as exc:
        raise DataError(f"unknown document id {exc.args[0]!r}") from None
    retriever = config.retriever(q_table, t_table).fit(targets)
    q_dist = TermWeighter(config.weighting).fit(queries).transform([q_doc])[0]
    t_dist = retriever.target_weighter_.transform([t_doc])[0]
    policy = retriever.policy
    tables = (retriever.query_table_, retriever.target_table_)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if config.exact:
        res, ds, dt = transport(q_dist, t_dist, *tables, policy)
        path = out_dir / f"plan_{qid}_{tid}_exact.csv"
        export_plan(res, ds.words, dt.words, path)
        written.append((path, res))
    else:
        base = SinkhornConfig(config.epsilon, config.max_iter, config.tolerance, config.stabilized,
                              epsilon_scaling=config.epsilon_scaling)
        epsilons = config.sweep if config.sweep else [config.epsilon]
        plans = sweep(q_dist, t_dist, *tables, policy, epsilons, base)
        for eps, res in plans.results.items():
            path = out_dir / f"plan_{qid}_{tid}_eps{_fmt_eps(eps)}.csv"
            export_plan(res, plans.src_words, plans.tgt_words, path)
            written.append((path, res))
    for path, res in written:
        print(f"{path}\tcost={res.transport_cost:.6g}\tentropy={res.entropy:.6g}")
    return EXIT_OK


COMMANDS = {"rank": cmd_rank, "evaluate": cmd_evaluate, "export-plan": cmd_export_plan}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    level = {0: logging.WARNING, 1: logging.INFO}.get(getattr(args, "verbose", 0), logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        config = resolve_config(args)
        return COMMANDS[config.command](config)
    except UsageError as exc:
        print(f"wassret: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"wassret: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"wassret: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"wassret: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
