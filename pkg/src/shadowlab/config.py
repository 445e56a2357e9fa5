"""Declarative INI configuration for the command-line pipelines.

Sections: [system] (registry name or linear part + polynomial terms),
[region], [norm], [constants], [dichotomy], [pseudo], [solver], [grid],
[output].  Values are flat key-value text: matrices as ';'-separated rows,
polynomial terms as comma-separated "coeff x1^p x2 ..." monomials.
"""

from __future__ import annotations

import configparser
from typing import Optional

import numpy as np

from .errors import ConfigError
from .linear_dynamics import DichotomyData, DichotomyKind
from .lognorm import NormKind, as_norm
from .pseudo import (exm_pseudosolution, perturbed_orbit,
                     si_equilibrium_pseudosolution, wiggle_pseudosolution)
from .systems import (Ball, Box, HalfLine, OdeSystem, Region, SimplexGamma,
                      registry)


def parse_matrix(text: str) -> np.ndarray:
    """Matrix literal: rows split on ';', entries on whitespace or ','."""
    rows = []
    for chunk in text.strip().split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        rows.append([float(v) for v in chunk.replace(",", " ").split()])
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        raise ConfigError(f"malformed matrix literal: {text!r}")
    return np.array(rows)


def parse_vector(text: str) -> np.ndarray:
    return np.array([float(v) for v in text.replace(",", " ").split()])


def parse_poly_terms(text: str, n: int):
    """One component: comma-separated monomials "coeff x1^p x2 ..."."""
    terms = []
    for raw in text.split(","):
        raw = raw.strip()
        if not raw:
            continue
        tokens = raw.split()
        try:
            coeff = float(tokens[0])
        except ValueError as exc:
            raise ConfigError(f"monomial must start with a coefficient: "
                              f"{raw!r}") from exc
        exps = [0] * n
        for tok in tokens[1:]:
            base, _, power = tok.partition("^")
            if not base.startswith("x"):
                raise ConfigError(f"bad variable token {tok!r} in {raw!r}")
            try:
                j = int(base[1:]) - 1
                p = int(power) if power else 1
            except ValueError as exc:
                raise ConfigError(f"bad variable token {tok!r} in {raw!r}") from exc
            if not 0 <= j < n:
                raise ConfigError(f"variable index out of range in {tok!r} "
                                  f"(dimension {n})")
            exps[j] += p
        terms.append((coeff, tuple(exps)))
    return terms


class Config:
    """Loaded configuration with typed accessors and key diagnostics."""

    def __init__(self, parser: configparser.ConfigParser, path: str = "<config>"):
        self.parser = parser
        self.path = path

    @classmethod
    def load(cls, path) -> "Config":
        parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from exc
        return cls(parser, str(path))

    def _get(self, section: str, key: str, cast, default=None, required=False):
        if not self.parser.has_option(section, key):
            if required:
                raise ConfigError(f"{self.path}: missing [{section}] {key}")
            return default
        raw = self.parser.get(section, key)
        try:
            return cast(raw)
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"{self.path}: [{section}] {key} = {raw!r}: "
                              f"{exc}") from exc

    def get_float(self, section, key, default=None, required=False) -> Optional[float]:
        return self._get(section, key, float, default, required)

    def get_int(self, section, key, default=None, required=False) -> Optional[int]:
        return self._get(section, key, int, default, required)

    def get_str(self, section, key, default=None, required=False) -> Optional[str]:
        return self._get(section, key, lambda s: s.strip(), default, required)

    def get_vector(self, section, key, default=None, required=False):
        return self._get(section, key, parse_vector, default, required)

    def get_matrix(self, section, key, default=None, required=False):
        return self._get(section, key, parse_matrix, default, required)

    # ------------------------------------------------------------------
    # object builders

    def norm(self) -> NormKind:
        return as_norm(self.get_str("norm", "kind", "inf"))

    def system(self) -> OdeSystem:
        name = self.get_str("system", "name", required=True)
        if name == "logistic":
            return registry("logistic",
                            a=self.get_float("system", "a", required=True),
                            b=self.get_float("system", "b", required=True))
        if name == "linear_poly":
            A = self.get_matrix("system", "A", required=True)
            n = A.shape[0]
            coeffs = []
            for i in range(n):
                text = self.get_str("system", f"f{i + 1}", "")
                coeffs.append(parse_poly_terms(text, n) if text else [])
            return registry("linear_poly", A=A, coeffs=coeffs)
        return registry(name)

    def region(self) -> Optional[Region]:
        if not self.parser.has_section("region"):
            return None
        shape = self.get_str("region", "shape", required=True).lower()
        delta = self.get_float("region", "delta", 0.0)
        if shape == "ball":
            return Ball(self.get_vector("region", "center", required=True),
                        self.get_float("region", "rho", required=True),
                        norm=self.norm(), delta=delta)
        if shape == "box":
            return Box(self.get_vector("region", "lo", required=True),
                       self.get_vector("region", "hi", required=True),
                       delta=delta)
        if shape == "halfline":
            return HalfLine(self.get_float("region", "a", required=True),
                            self.get_int("region", "dim", 1), delta=delta)
        if shape == "simplex":
            return SimplexGamma(self.get_float("region", "c", required=True),
                                delta=delta)
        raise ConfigError(f"{self.path}: [region] shape = {shape!r}: expected "
                          "ball, box, halfline or simplex")

    def dichotomy(self, n: int) -> DichotomyData:
        kind = self.get_str("dichotomy", "kind", "contraction").lower()
        N = self.get_float("dichotomy", "N", required=True)
        lam = self.get_float("dichotomy", "lambda", required=True)
        if kind == "contraction":
            return DichotomyData.contraction(n, N, lam)
        if kind == "expansion":
            return DichotomyData.expansion(n, N, lam)
        if kind == "projection":
            P = self.get_matrix("dichotomy", "P", required=True)
            return DichotomyData.with_projection(P, N, lam)
        raise ConfigError(f"{self.path}: [dichotomy] kind = {kind!r}: expected "
                          "contraction, expansion or projection")

    def pseudosolution(self, sys: OdeSystem, H: Optional[Region], seed: int):
        gen = self.get_str("pseudo", "generator", "perturbed").lower()
        T = self.get_float("pseudo", "T", 2.0)
        dt = self.get_float("pseudo", "dt", 0.005)
        if gen == "perturbed":
            return perturbed_orbit(
                sys, self.get_vector("pseudo", "x0", required=True), T,
                self.get_float("pseudo", "amplitude", required=True),
                seed, H=H, dt=dt, norm=self.norm())
        if gen == "wiggle":
            center = self.get_vector("pseudo", "x0", np.zeros(sys.n))
            return wiggle_pseudosolution(
                sys, T, self.get_float("pseudo", "scale", required=True),
                seed, center=center, dt=dt, norm=self.norm())
        if gen == "exm":
            grid = np.linspace(0.0, T, int(round(T / dt)) + 1)
            return exm_pseudosolution(
                self.get_float("pseudo", "delta", required=True), grid)
        if gen == "si_equilibrium":
            grid = np.linspace(0.0, T, int(round(T / dt)) + 1)
            return si_equilibrium_pseudosolution(
                self.get_float("pseudo", "epsilon", required=True), grid)
        raise ConfigError(f"{self.path}: [pseudo] generator = {gen!r}: expected "
                          "perturbed, wiggle, exm or si_equilibrium")

    def grid(self) -> np.ndarray:
        t0 = self.get_float("grid", "t0", 0.0)
        t1 = self.get_float("grid", "t1", 5.0)
        points = self.get_int("grid", "points", 11)
        if points < 1 or t1 <= t0:
            raise ConfigError(f"{self.path}: [grid] needs t1 > t0 and points >= 1")
        return np.linspace(t0, t1, points)
