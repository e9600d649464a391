"""From-scratch tabular regression for crop-yield data: seven regressors,
regression metrics, descriptive statistics and a comparison CLI."""

__version__ = "0.1.0"
