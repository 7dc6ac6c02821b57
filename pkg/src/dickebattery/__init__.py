"""Open-system Dicke quantum batteries: models, dynamics and ergotropy."""

__version__ = "0.1.0"
