from .app import Scorer, create_app

__all__ = ["Scorer", "create_app"]
