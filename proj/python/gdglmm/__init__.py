"""Bayesian generalized linear mixed models fitted by Gibbs sampling."""

from ._core import GdglmmError, ess, normalize_spec, rhat, simulate
from ._core import fit as _fit

__all__ = ["GdglmmError", "FitResult", "ess", "fit", "normalize_spec", "rhat", "simulate"]


class FitResult:
    """Draws and per-parameter summaries from one fit."""

    def __init__(self, raw):
        self.names = list(raw["names"])
        self.draws = raw["draws"]  # (chains, draws, parameters)
        self.summary = dict(raw["summary"])

    def index(self, name):
        return self.names.index(name)

    def pooled(self, name):
        return self.draws[:, :, self.index(name)].reshape(-1)

    def row(self, name):
        i = self.index(name)
        return {key: float(values[i]) for key, values in self.summary.items()}


def fit(spec, data, **overrides):
    """Fit `spec` (model-spec text) to `data` (CSV text).

    Keyword overrides: seed, chains, burnin, kept, thin, threads.
    """
    return FitResult(_fit(spec, data, **overrides))
