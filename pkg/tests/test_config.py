from __future__ import annotations

import os
import unittest
from unittest import mock

from src.core.config import get_settings
from src.core.errors import DataError, NumericalError, TopicModelError, UsageError


class SettingsTests(unittest.TestCase):
    def test_defaults(self) -> None:
        with mock.patch.dict(os.environ, {}, clear=True):
            settings = get_settings()
        self.assertEqual(settings.threads, 1)
        self.assertEqual(settings.log_level, "INFO")
        self.assertEqual(settings.default_seed, 7)
        self.assertEqual(settings.output_dir, "runs")
        self.assertTrue(settings.deterministic)

    def test_overrides(self) -> None:
        env = {
            "TOPIC_MODEL_THREADS": "4",
            "TOPIC_MODEL_LOG_LEVEL": "debug",
            "TOPIC_MODEL_SEED": "123",
            "TOPIC_MODEL_OUTPUT_DIR": "/tmp/topics",
            "TOPIC_MODEL_DETERMINISTIC": "off",
        }
        with mock.patch.dict(os.environ, env, clear=True):
            settings = get_settings()
        self.assertEqual(settings.threads, 4)
        self.assertEqual(settings.log_level, "DEBUG")
        self.assertEqual(settings.default_seed, 123)
        self.assertEqual(settings.output_dir, "/tmp/topics")
        self.assertFalse(settings.deterministic)

    def test_unrecognised_values_fall_back(self) -> None:
        env = {
            "TOPIC_MODEL_THREADS": "0",
            "TOPIC_MODEL_LOG_LEVEL": "loud",
            "TOPIC_MODEL_OUTPUT_DIR": "  ",
            "TOPIC_MODEL_DETERMINISTIC": "maybe",
        }
        with mock.patch.dict(os.environ, env, clear=True):
            settings = get_settings()
        self.assertEqual(settings.threads, 1)
        self.assertEqual(settings.log_level, "INFO")
        self.assertEqual(settings.output_dir, "runs")
        self.assertTrue(settings.deterministic)


class ErrorTests(unittest.TestCase):
    def test_exit_codes(self) -> None:
        self.assertEqual(UsageError("x").exit_code, 1)
        self.assertEqual(DataError("x").exit_code, 2)
        self.assertEqual(NumericalError("x").exit_code, 3)
        for error in (UsageError("x"), DataError("x"), NumericalError("x")):
            self.assertIsInstance(error, TopicModelError)

    def test_data_error_location(self) -> None:
        self.assertEqual(str(DataError("bad value", path="a.csv", line=3)), "a.csv:3: bad value")
        self.assertEqual(str(DataError("bad value", line=3)), "line 3: bad value")
        self.assertIsInstance(DataError("x"), ValueError)

    def test_numerical_error_names_term(self) -> None:
        error = NumericalError("non-finite value", term="L_ECR")
        self.assertEqual(error.term, "L_ECR")
        self.assertEqual(str(error), "L_ECR: non-finite value")


if __name__ == "__main__":
    unittest.main()
