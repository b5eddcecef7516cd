import argparse
import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from ..common.corpus import load_tsv
from ..common.metrics import WeightedReport, format_table
from .checkpoint import load_checkpoint
from .config import Config, PoolerKind, add_config_args, config_from_args
from .preprocess import cmd_prepare, write_json
from .runner import evaluate
from .test import cmd_eval
from .train import cmd_train

LOGGER = logging.getLogger(__package__ + ".experiment")


@dataclass
class TanglishExperiment:
    config: Config
    stats: dict = field(default_factory=dict)
    history: List[dict] = field(default_factory=list)
    report: Optional[WeightedReport] = None

    def __post_init__(self):
        self.config.set_seed()

    def run(self) -> Optional[WeightedReport]:
        self.preprocess()
        self.train()
        self.test()
        return self.report

    def preprocess(self) -> None:
        print("=== Preprocessing ===")
        self.stats = cmd_prepare(self.config)

    def train(self) -> None:
        print("=== Training ===")
        self.history = cmd_train(self.config)
        print("Training completed")

    def test(self) -> None:
        if self.config.test_path is None:
            LOGGER.info("No test file is configured; skipping evaluation.")
            return
        print("=== Testing ===")
        self.report = cmd_eval(self.config)

    def score_train(self) -> WeightedReport:
        ckpt = load_checkpoint(self.config.checkpoint_path)
        corpus = load_tsv(
            self.config.train_corpus_path,
            self.config.text_col,
            self.config.label_col,
            self.config.id_col,
            ckpt.label_names,
            ckpt.clean_rules,
        )
        report, _ = evaluate(ckpt.to_model(), ckpt.vocab, corpus, ckpt.train_config.eval_batch_size)
        return report


def variant_name(pooler_kind: PoolerKind, balance: bool) -> str:
    return f"{pooler_kind.value}-{'balanced' if balance else 'unbalanced'}"


def run_comparison(config: Config) -> Dict[str, WeightedReport]:
    """Runs the pipeline once per pooler kind, with and without class balancing.

    Each variant gets its own subdirectory of output_dir. Every model is scored on its prepared training corpus
    and, when a test file is configured, on the test file. The rows go to comparison.json and to a score table.
    """
    reports: Dict[str, WeightedReport] = {}
    for pooler_kind, balance in itertools.product(PoolerKind, (True, False)):
        name = variant_name(pooler_kind, balance)
        variant = config.with_overrides(
            {"pooler_kind": pooler_kind.value, "balance": balance, "output_dir": str(config.output_dir / name)}
        )
        print(f"=== Variant {name} ===")
        experiment = TanglishExperiment(variant)
        experiment.preprocess()
        experiment.train()
        reports[f"{name} train"] = experiment.score_train()
        experiment.test()
        if experiment.report is not None:
            reports[f"{name} test"] = experiment.report

    write_json(
        config.comparison_path,
        {"config": config.to_dict(), "runs": {name: report.to_dict() for name, report in reports.items()}},
    )
    print("=== Comparison ===")
    print(format_table(list(reports.values()), list(reports), title="Model"))
    return reports


def main() -> None:
    parser = argparse.ArgumentParser(description="Run experiment - prepares, trains and tests")
    add_config_args(parser)
    parser.add_argument(
        "--compare", default=False, action="store_true", help="Compare both pooler kinds with and without balancing"
    )
    args = parser.parse_args()

    config = config_from_args(args)
    if args.compare:
        run_comparison(config)
    else:
        TanglishExperiment(config).run()


if __name__ == "__main__":
    main()
