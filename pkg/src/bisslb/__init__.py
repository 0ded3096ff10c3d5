"""Biclustering of binary matrices via sparse logistic matrix factorization.

The observation model is Bernoulli with logits ``mu 1^T + A B^T``; adaptive
spike-and-slab shrinkage makes the factor pair exactly sparse, so
biclusters can be read off the nonzero supports, and the number of
biclusters is learned by pruning dead columns during optimization.

Submodules are imported lazily so that the console entry point can cap
BLAS threads before NumPy loads.
"""

from importlib import import_module

__version__ = "0.1.0"

_EXPORTS = {
    "BinaryMatrix": "model",
    "FactorPair": "model",
    "Hyperparams": "model",
    "SolverState": "model",
    "success_probability": "model",
    "log_likelihood": "model",
    "log_posterior": "model",
    "gradient_wrt_A": "model",
    "gradient_wrt_B": "model",
    "PenaltyParams": "penalty",
    "p_star": "penalty",
    "lambda_star": "penalty",
    "g_check": "penalty",
    "threshold_upper": "penalty",
    "soft_threshold": "penalty",
    "FitResult": "solver",
    "DivergenceError": "solver",
    "fit": "solver",
    "fit_ladder": "solver",
    "InitSpec": "initialization",
    "init_svd": "initialization",
    "init_warm": "initialization",
    "init_random": "initialization",
    "SimConfig": "simulate",
    "PlantedTruth": "simulate",
    "simulate_I": "simulate",
    "simulate_II": "simulate",
    "Bicluster": "metrics",
    "BiclusterSet": "metrics",
    "extract_biclusters": "metrics",
    "jaccard": "metrics",
    "match_and_score": "metrics",
    "relevance_recovery": "metrics",
    "auc_aupr": "metrics",
    "read_matrix": "matrix_io",
    "write_matrix": "matrix_io",
    "write_fit": "matrix_io",
    "read_factors": "matrix_io",
}

__all__ = ["__version__", *sorted(_EXPORTS)]


def __getattr__(name: str):
    module = _EXPORTS.get(name)
    if module is None:
        raise AttributeError(f"module 'bisslb' has no attribute {name!r}")
    return getattr(import_module(f".{module}", __name__), name)


def __dir__():
    return sorted(set(globals()) | set(_EXPORTS))
