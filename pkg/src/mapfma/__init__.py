"""Multiagent path finding with malfunctioning agents: models, protocols, generators."""

__version__ = "0.1.0"
