from .app import Components, build_components, create_app, create_app_from_config
from .auth import TokenService
from .cli import main

__all__ = [
    "Components",
    "build_components",
    "create_app",
    "create_app_from_config",
    "TokenService",
    "main",
]
