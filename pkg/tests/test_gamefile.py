"""
Test YAML game and experiment files.
"""

import os
import sys
import tempfile
import unittest
from pathlib import Path

import numpy as np
import yaml

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from drgames.exceptions import GameFileError
from drgames.gamefile import ExperimentSpec, GameFile
from drgames.inspection import InspectionParams, build_inspection_game, inspection_uncertainty
from drgames.risk import RiskProfile


def inspection_file(eps=(1.0, 0.5)):
    params = InspectionParams()
    ambiguity, nominal = build_inspection_game(params)
    return GameFile(ambiguity, RiskProfile(eps), inspection_uncertainty(params), nominal)


class TestGameFile(unittest.TestCase):

    def test_round_trip(self):
        game = inspection_file()
        again = GameFile.loads(game.dumps())
        self.assertEqual(again.emit(), game.emit())
        np.testing.assert_allclose(again.ambiguity.support.W, game.ambiguity.support.W)
        self.assertEqual(again.risk, game.risk)

    def test_dump_and_load(self):
        game = inspection_file()
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "game.yaml"
            game.dump(path)
            loaded = GameFile.load(path)
        self.assertEqual(loaded.emit(), game.emit())

    def test_nominal_mean(self):
        data = inspection_file().emit()
        data["mean"] = "nominal"
        game = GameFile.parse(data)
        np.testing.assert_allclose(game.ambiguity.m, [0, 15, 5, 5, -5, -15, 0, 5])

    def test_explicit_support(self):
        data = {
            "shape": [2, 2],
            "support": {"W": np.vstack([np.eye(8), -np.eye(8)]).tolist(), "h": [1.0] * 16},
            "mean": [0.0] * 8,
            "s": "1e-3",
            "risk": [1, 1],
        }
        game = GameFile.parse(data)
        self.assertAlmostEqual(game.ambiguity.s, 1e-3)
        self.assertIsNone(game.uncertainty)
        self.assertEqual(GameFile.loads(game.dumps()).emit(), game.emit())

    def test_missing_field(self):
        data = inspection_file().emit()
        del data["s"]
        with self.assertRaises(GameFileError) as context:
            GameFile.parse(data, path="game.yaml")
        self.assertEqual(context.exception.field, "s")
        self.assertEqual(context.exception.path, "game.yaml")

    def test_wrong_lengths(self):
        data = inspection_file().emit()
        data["mean"] = [0.0] * 7
        with self.assertRaises(GameFileError) as context:
            GameFile.parse(data)
        self.assertEqual(context.exception.field, "mean")

    def test_bad_risk_level(self):
        data = inspection_file().emit()
        data["risk"] = [1.0, 1.5]
        with self.assertRaises(GameFileError):
            GameFile.parse(data)

    def test_no_support(self):
        data = inspection_file().emit()
        del data["uncertainty"]
        with self.assertRaises(GameFileError) as context:
            GameFile.parse(data)
        self.assertEqual(context.exception.field, "support")

    def test_not_a_mapping(self):
        with self.assertRaises(GameFileError):
            GameFile.loads("- 1\n- 2\n")
        with self.assertRaises(GameFileError):
            GameFile.loads("shape: [2, 2\n")

    def test_unreadable_file(self):
        with self.assertRaises(GameFileError):
            GameFile.load("/nonexistent/game.yaml")


class TestExperimentSpec(unittest.TestCase):

    def test_defaults(self):
        spec = ExperimentSpec.parse({})
        self.assertEqual(spec.grid, [(1.0, 1.0)])
        self.assertEqual(spec.params, InspectionParams())
        self.assertFalse(spec.check_tables)

    def test_full_document(self):
        text = """
inspection: {w: 15, g: [8, 12], v: [16, 24], h: [4, 6], s: 4, mean: nominal}
grid: [[1, 1], [1, 0.75]]
search: {restarts: 4, seed: 42}
check_tables: true
"""
        spec = ExperimentSpec.parse(yaml.safe_load(text))
        self.assertEqual(spec.grid, [(1.0, 1.0), (1.0, 0.75)])
        self.assertEqual(spec.search.seed, 42)
        self.assertTrue(spec.check_tables)
        self.assertEqual(ExperimentSpec.parse(spec.to_dict()).to_dict(), spec.to_dict())

    def test_bad_grid(self):
        with self.assertRaises(GameFileError):
            ExperimentSpec.parse({"grid": [[1, 0]]})
        with self.assertRaises(GameFileError):
            ExperimentSpec.parse({"grid": []})

    def test_unknown_search_setting(self):
        with self.assertRaises(GameFileError) as context:
            ExperimentSpec.parse({"search": {"restart": 4}})
        self.assertEqual(context.exception.field, "search")

    def test_invalid_interval(self):
        with self.assertRaises(GameFileError):
            ExperimentSpec.parse({"inspection": {"g": [12, 8]}})


if __name__ == '__main__':
    unittest.main()
