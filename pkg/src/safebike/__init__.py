"""Availability-aware bike-share route recommendations.

Subsystems: geo (primitives and spatial index), model (domain types),
ingest (parsers and persistence), predict (availability forecasting),
spatial (buffer queries), routing (route search and scoring),
service (HTTP API and engine lifecycle).
"""

__version__ = "0.1.0"
