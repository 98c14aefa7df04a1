from __future__ import annotations

import argparse
import logging
import sys
from typing import NoReturn, Sequence

import torch

from src.app.handlers.commands.eval_handler import EvalHandler
from src.app.handlers.commands.report_handler import ReportHandler
from src.app.handlers.commands.synth_handler import SynthHandler
from src.app.handlers.commands.train_handler import TrainHandler
from src.app.messages import HELP_TEXT, msg
from src.core.config import Settings
from src.core.errors import DataError, NumericalError, TopicModelError, UsageError

LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        raise UsageError(f"{self.prog}: {message}")


class TopicModelApp:
    def __init__(self, settings: Settings):
        self.settings = settings
        self.synth_handler = SynthHandler(self)
        self.train_handler = TrainHandler(self)
        self.eval_handler = EvalHandler(self)
        self.report_handler = ReportHandler(self)
        self.parser = self._build_parser()

    def _build_parser(self) -> argparse.ArgumentParser:
        parser = _ArgumentParser(
            prog="main.py",
            description=HELP_TEXT,
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        subparsers = parser.add_subparsers(dest="command", parser_class=_ArgumentParser)
        subparsers.required = True
        self.synth_handler.register(subparsers)
        self.train_handler.register(subparsers)
        self.eval_handler.register(subparsers)
        self.report_handler.register(subparsers)
        return parser

    def configure_runtime(self) -> None:
        logging.basicConfig(
            level=getattr(logging, self.settings.log_level, logging.INFO),
            format="%(asctime)s %(levelname)s %(name)s - %(message)s",
        )
        logging.getLogger("torch").setLevel(logging.WARNING)
        torch.set_num_threads(self.settings.threads)
        if self.settings.deterministic:
            torch.use_deterministic_algorithms(True)

    def run(self, argv: Sequence[str]) -> int:
        try:
            args = self.parser.parse_args(list(argv))
        except UsageError as exc:
            print(msg("error_prefix", error=exc), file=sys.stderr)
            return EXIT_USAGE
        self.configure_runtime()
        try:
            return int(args.handler(args))
        except UsageError as exc:
            print(msg("error_prefix", error=exc), file=sys.stderr)
            return EXIT_USAGE
        except NumericalError as exc:
            LOGGER.error("Numerical failure: %s", exc)
            print(msg("error_prefix", error=exc), file=sys.stderr)
            return EXIT_NUMERICAL
        except (DataError, FileNotFoundError, OSError) as exc:
            LOGGER.error("Data error: %s", exc)
            print(msg("error_prefix", error=exc), file=sys.stderr)
            return EXIT_DATA
        except TopicModelError as exc:
            print(msg("error_prefix", error=exc), file=sys.stderr)
            return exc.exit_code
        except ValueError as exc:
            # invalid hyperparameters surface from the config dataclasses as ValueError
            print(msg("error_prefix", error=exc), file=sys.stderr)
            return EXIT_USAGE
