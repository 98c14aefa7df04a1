from __future__ import annotations

__all__ = ["TopicModelApp"]


def __getattr__(name: str):
    if name == "TopicModelApp":
        from src.app.cli_orchestrator import TopicModelApp

        return TopicModelApp
    raise AttributeError(name)
