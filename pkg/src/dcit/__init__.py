"""Digital Competitiveness Index for Trade: construction, clustering, robustness and scenario forecasts."""

__version__ = "0.1.0"
