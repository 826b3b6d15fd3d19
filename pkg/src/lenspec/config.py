"""Run configuration: flat INI sections, validated into typed accessors.

Every experiment is driven by one config file (plus a handful of override
flags), so any run can be archived and replayed byte-for-byte.  All
randomness flows from the single seed through a counter-based generator,
keyed per purpose, so worker counts and call order cannot perturb it.
"""

from __future__ import annotations

import configparser
import os
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, PreconditionViolated
from .matrices import Representation, parse_matrix
from .metrics import (
    CombinationMetric,
    ConedOffMetric,
    GeneratingSet,
    MatrixLogNormMetric,
    MetricHandle,
    PulledBackMetric,
    SymmetrizedMatrixLogNormMetric,
    WordMetric,
    standard_generating_set,
)
from .subgroups import SubgroupGraph
from .words import Automorphism, parse_word

OUTDIR_ENV = "LENSPEC_OUTDIR"


def seeded_rng(seed: int, purpose: str) -> np.random.Generator:
    """Independent stream per purpose from one master seed (counter-based)."""
    key = [seed & 0xFFFFFFFFFFFFFFFF, zlib.crc32(purpose.encode())]
    return np.random.Generator(np.random.Philox(key=key))


@dataclass
class RunConfig:
    """Parsed config file with typed, diagnosed accessors and builders."""

    path: Path
    parser: configparser.ConfigParser
    text: str

    def __post_init__(self):
        self._metrics: dict[str, MetricHandle] = {}
        self._subgroups: dict[str, SubgroupGraph] = {}

    @classmethod
    def load(cls, path) -> "RunConfig":
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file {p} does not exist")
        return cls.from_text(p.read_text(), name=str(p))

    @classmethod
    def from_text(cls, text: str, name: str = "<inline>") -> "RunConfig":
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        try:
            parser.read_string(text, source=name)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse config: {exc.message}",
                              line=getattr(exc, "lineno", None)) from exc
        return cls(path=Path(name), parser=parser, text=text)

    # -- low-level accessors -------------------------------------------------

    def _line_of(self, section: str, key: str) -> int | None:
        in_section = False
        for i, line in enumerate(self.text.splitlines(), start=1):
            stripped = line.strip()
            if stripped.startswith("[") and stripped.endswith("]"):
                in_section = stripped[1:-1].strip() == section
            elif in_section and stripped.split("=")[0].strip() == key:
                return i
        return None

    def has_section(self, section: str) -> bool:
        return self.parser.has_section(section)

    def sections(self) -> list[str]:
        return self.parser.sections()

    def get(self, section: str, key: str, default=None, required: bool = False) -> str | None:
        if not self.parser.has_section(section):
            if required:
                raise ConfigError("missing section", section=section)
            return default
        if not self.parser.has_option(section, key):
            if required:
                raise ConfigError("missing key", section=section, key=key)
            return default
        return self.parser.get(section, key).strip()

    def _convert(self, section: str, key: str, raw: str, kind, label: str):
        try:
            return kind(raw)
        except ValueError:
            raise ConfigError(f"expected {label}, got {raw!r}", section=section, key=key,
                              line=self._line_of(section, key)) from None

    def get_int(self, section: str, key: str, default=None, required: bool = False):
        raw = self.get(section, key, None, required)
        if raw is None:
            return default
        return self._convert(section, key, raw, int, "an integer")

    def get_float(self, section: str, key: str, default=None, required: bool = False):
        raw = self.get(section, key, None, required)
        if raw is None:
            return default
        return self._convert(section, key, raw, float, "a number")

    def get_bool(self, section: str, key: str, default=None, required: bool = False):
        raw = self.get(section, key, None, required)
        if raw is None:
            return default
        low = raw.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ConfigError(f"expected a boolean, got {raw!r}", section=section, key=key,
                          line=self._line_of(section, key))

    def get_list(self, section: str, key: str, default=None, required: bool = False):
        raw = self.get(section, key, None, required)
        if raw is None:
            return default if default is not None else []
        return [item.strip() for item in raw.split(",") if item.strip()]

    def override(self, dotted_key: str, value: str) -> None:
        """Apply a --set SECTION.KEY=VALUE style override."""
        if "." not in dotted_key:
            raise ConfigError(f"override {dotted_key!r} must look like section.key")
        section, key = dotted_key.split(".", 1)
        if not self.parser.has_section(section):
            self.parser.add_section(section)
        self.parser.set(section, key, value)

    # -- run-level settings ----------------------------------------------------

    @property
    def seed(self) -> int:
        return self.get_int("run", "seed", 20240601)

    @property
    def workers(self) -> int:
        w = self.get_int("run", "workers", 1)
        if w < 1:
            raise ConfigError("workers must be >= 1", section="run", key="workers")
        return w

    @property
    def rank(self) -> int:
        r = self.get_int("group", "rank", 2)
        if r < 2:
            raise ConfigError("rank must be >= 2", section="group", key="rank")
        return r

    def outdir(self, override: str | None = None) -> Path:
        if override:
            return Path(override)
        from_cfg = self.get("run", "outdir", None)
        if from_cfg:
            return Path(from_cfg)
        env = os.environ.get(OUTDIR_ENV)
        return Path(env) if env else Path("out")

    def rng(self, purpose: str) -> np.random.Generator:
        return seeded_rng(self.seed, purpose)

    # -- object builders --------------------------------------------------------

    def subgroup(self, name: str) -> SubgroupGraph:
        if name in self._subgroups:
            return self._subgroups[name]
        section = f"subgroup {name}"
        gens = self.get_list(section, "generators", required=True)
        try:
            graph = SubgroupGraph([parse_word(g) for g in gens], self.rank)
        except ValueError as exc:
            raise ConfigError(str(exc), section=section, key="generators") from exc
        self._subgroups[name] = graph
        return graph

    def metric(self, name: str) -> MetricHandle:
        if name in self._metrics:
            return self._metrics[name]
        section = f"metric {name}"
        if not self.has_section(section):
            raise ConfigError(f"metric {name!r} is not defined", section=section)
        kind = (self.get(section, "kind", required=True) or "").lower()
        delta = self.get_float(section, "delta", 0.0)
        alpha = self.get_float(section, "alpha_rg", 0.0)
        budget = self.get_int(section, "node_budget", 30_000_000)
        rank = self.rank
        try:
            handle = self._build_metric(section, name, kind, delta, alpha, budget, rank)
        except (ValueError, PreconditionViolated) as exc:
            raise ConfigError(str(exc), section=section) from exc
        self._metrics[name] = handle
        return handle

    def _build_metric(self, section, name, kind, delta, alpha, budget, rank) -> MetricHandle:
        if kind == "word":
            raw = self.get(section, "generators", "standard") or "standard"
            if raw.lower() == "standard":
                gens = standard_generating_set(rank)
            else:
                gens = GeneratingSet([parse_word(t.strip()) for t in raw.split(",")], rank)
            return WordMetric(gens, delta, alpha, node_budget=budget, name=name)
        if kind == "pullback":
            inner = self.metric(self.get(section, "inner", required=True))
            images = self.get_list(section, "images", required=True)
            inv_images = self.get_list(section, "inverse_images", required=True)
            phi = Automorphism.from_strings(rank, images, inv_images)
            return PulledBackMetric(phi, inner, name=name)
        if kind == "combination":
            terms = []
            for item in self.get_list(section, "terms", required=True):
                if "*" not in item:
                    raise ConfigError(f"term {item!r} must look like coef*metric",
                                      section=section, key="terms")
                coef, metric_name = item.split("*", 1)
                terms.append((float(coef), self.metric(metric_name.strip())))
            return CombinationMetric(terms, name=name)
        if kind in ("matrix-log-norm", "sym-matrix-log-norm"):
            rep = self._representation(section)
            cls = MatrixLogNormMetric if kind == "matrix-log-norm" else SymmetrizedMatrixLogNormMetric
            return cls(rep, delta, alpha, name=name)
        if kind == "coned-off":
            base = self.metric(self.get(section, "base", required=True))
            if not isinstance(base, WordMetric):
                raise ConfigError("coned-off base must be a word metric", section=section,
                                  key="base")
            graph = self.subgroup(self.get(section, "subgroup", required=True))
            radius = self.get_int(section, "universe_radius", 8)
            return ConedOffMetric(base.gens, graph, radius, delta, alpha,
                                  node_budget=budget, name=name)
        raise ConfigError(f"unknown metric kind {kind!r}", section=section, key="kind")

    def _representation(self, section: str) -> Representation:
        dim = self.get_int(section, "dimension", required=True)
        rank = self.rank
        images = []
        for g in range(rank):
            letter = chr(ord("a") + g)
            raw = self.get(section, f"matrix.{letter}", required=True)
            entries = [x.strip() for x in raw.split(",")]
            images.append(parse_matrix(entries, dim))
        normalized = self.get_bool(section, "normalized", True)
        return Representation(rank, images, normalized=normalized)

    def matrix_set(self, name: str):
        from .matrices import MatrixSet

        section = f"matrixset {name}"
        if not self.has_section(section):
            raise ConfigError(f"matrix set {name!r} is not defined", section=section)
        dim = self.get_int(section, "dimension", required=True)
        mats = []
        index = 1
        while True:
            raw = self.get(section, f"matrix.{index}", None)
            if raw is None:
                break
            mats.append(parse_matrix([x.strip() for x in raw.split(",")], dim))
            index += 1
        if not mats:
            raise ConfigError("matrix set needs matrix.1, matrix.2, ...",
                              section=section, key="matrix.1")
        return MatrixSet(mats)
