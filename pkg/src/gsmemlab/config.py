"""Run configuration: one JSON document, every field optional.

Example (all values shown are the defaults)::

    {
      "seed": 42,
      "split_fraction": 0.7,
      "out_dir": "results",
      "jobs": 1,
      "algorithms": ["LR", "RF", "SVM", "BT", "BPNN", "NBC"],
      "modulation": {"carrier_frequency": 850e6, "bit_duration": 0.001,
                     "sample_rate": 4000, "amplitude_high": 1.5,
                     "amplitude_low": 1.0, "channel_count": 2,
                     "per_channel_gain": 1.0},
      "noise": {"amplitude_sigma": 0.2, "frequency_jitter_sigma": 2e6},
      "generator": {"n_benign": 1000, "n_attack": 1000,
                    "benign_frequency_min": 800e6, "benign_frequency_max": 900e6,
                    "benign_amplitude_mean": 1.0, "benign_amplitude_std": 0.25,
                    "payload_bits": 32, "window": null},
      "grids": {"LR": {"learning_rate": [0.1, 0.5], ...}, ...},
      "train": {"LR": {"learning_rate": 0.5}}
    }

``grids`` entries replace the built-in grid of that algorithm; ``train``
entries override the single-model defaults used by ``gsmemlab train``.
"""

import dataclasses
import json
from dataclasses import dataclass, field

from .channel import ModulationConfig, NoiseModel
from .classifiers import ALGORITHMS, TAGS, TrainConfig
from .dataset import GeneratorConfig
from .errors import ParseError
from .eval import DEFAULT_GRID_SPECS, expand_grid

_TOP_LEVEL = {"seed", "split_fraction", "out_dir", "jobs", "algorithms", "modulation",
              "noise", "generator", "grids", "train"}
_GENERATOR_FIELDS = {f.name for f in dataclasses.fields(GeneratorConfig)} - {
    "modulation", "noise", "seed"}


@dataclass(frozen=True)
class RunConfig:
    seed: int = 42
    split_fraction: float = 0.7
    out_dir: str = "results"
    jobs: int = 1
    algorithms: tuple = ALGORITHMS
    modulation: ModulationConfig = field(default_factory=ModulationConfig)
    noise: NoiseModel = field(default_factory=lambda: GeneratorConfig().noise)
    generator: dict = field(default_factory=dict)
    grid_specs: dict = field(default_factory=lambda: dict(DEFAULT_GRID_SPECS))
    train_overrides: dict = field(default_factory=dict)

    def with_seed(self, seed):
        return dataclasses.replace(self, seed=int(seed)) if seed is not None else self

    def generator_config(self):
        return GeneratorConfig(modulation=self.modulation, noise=self.noise,
                               seed=self.seed, **self.generator)

    def grids(self):
        return {tag: expand_grid(tag, self.grid_specs.get(tag, {}), self.seed)
                for tag in self.algorithms}

    def train_config(self, algorithm):
        return TrainConfig.for_algorithm(
            algorithm, **{"seed": self.seed, **self.train_overrides.get(algorithm, {})})


def _section(doc, name, allowed, path):
    sec = doc.get(name, {})
    if not isinstance(sec, dict):
        raise ParseError(f"'{name}' must be an object", path)
    unknown = set(sec) - allowed
    if unknown:
        raise ParseError(f"unknown field(s) in '{name}': {', '.join(sorted(unknown))}", path)
    return sec


def parse_run_config(doc, path=None):
    if not isinstance(doc, dict):
        raise ParseError("configuration must be a JSON object", path)
    unknown = set(doc) - _TOP_LEVEL
    if unknown:
        raise ParseError(f"unknown top-level field(s): {', '.join(sorted(unknown))}", path)
    mod_fields = {f.name for f in dataclasses.fields(ModulationConfig)}
    noise_fields = {f.name for f in dataclasses.fields(NoiseModel)}
    try:
        modulation = ModulationConfig(**_section(doc, "modulation", mod_fields, path))
        noise = NoiseModel(**{**dataclasses.asdict(GeneratorConfig().noise),
                              **_section(doc, "noise", noise_fields, path)})
        generator = dict(_section(doc, "generator", _GENERATOR_FIELDS, path))
        grids = _section(doc, "grids", set(TAGS), path)
        train = _section(doc, "train", set(TAGS), path)
        algorithms = tuple(doc.get("algorithms", ALGORITHMS))
        bad = [a for a in algorithms if a not in TAGS]
        if bad:
            raise ValueError(f"unknown algorithm(s): {', '.join(bad)}")
        cfg = RunConfig(
            seed=int(doc.get("seed", 42)),
            split_fraction=float(doc.get("split_fraction", 0.7)),
            out_dir=str(doc.get("out_dir", "results")),
            jobs=int(doc.get("jobs", 1)),
            algorithms=algorithms,
            modulation=modulation,
            noise=noise,
            generator=generator,
            grid_specs={**DEFAULT_GRID_SPECS, **grids},
            train_overrides=dict(train),
        )
        if not 0 < cfg.split_fraction < 1:
            raise ValueError("split_fraction must lie strictly between 0 and 1")
        if cfg.jobs < 1:
            raise ValueError("jobs must be >= 1")
        # surface bad generator/grid/train values now rather than mid-run
        cfg.generator_config()
        cfg.grids()
        for tag, overrides in cfg.train_overrides.items():
            if not isinstance(overrides, dict):
                raise ValueError(f"train.{tag} must be an object")
            cfg.train_config(tag)
    except ParseError:
        raise
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc), path) from None
    return cfg


def load_run_config(path):
    """Read and validate a run configuration; ``None`` gives the defaults."""
    if path is None:
        return RunConfig()
    with open(path) as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", path, exc.lineno) from None
    return parse_run_config(doc, path)
