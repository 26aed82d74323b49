"""
Registry of plant network builders.
"""
from typing import Callable, Dict, Optional
import importlib

from core_engine.crn.schemas import Network


class NetworkRegistry:
    """Registry for plant network builders (callables returning a Network)."""

    _builders: Dict[str, Callable[..., Network]] = {}

    @classmethod
    def register(cls, name: str, builder: Callable[..., Network]):
        """Register a network builder."""
        cls._builders[name] = builder

    @classmethod
    def get(cls, name: str) -> Optional[Callable[..., Network]]:
        """Get a network builder by name."""
        if not cls._builders:
            register_builtin_networks()
        return cls._builders.get(name)

    @classmethod
    def list_all(cls) -> Dict[str, Callable[..., Network]]:
        """List all registered builders."""
        if not cls._builders:
            register_builtin_networks()
        return cls._builders.copy()

    @classmethod
    def build(cls, name: str, **parameters) -> Network:
        """
        Build a registered network.

        Args:
            name: Registered name or a ``module:function`` path
            **parameters: Keyword arguments for the builder

        Returns:
            Network

        Raises:
            ValueError: Unknown builder or rejected parameters
        """
        builder = cls.get(name)
        if builder is None and ':' in name:
            builder = cls.load_from_path(name)
        if builder is None:
            known = ', '.join(sorted(cls.list_all()))
            raise ValueError(f"Unknown network builder {name!r} (known: {known})")
        try:
            return builder(**parameters)
        except TypeError as e:
            raise ValueError(f"Invalid parameters for network {name!r}: {e}")

    @classmethod
    def load_from_path(cls, module_path: str) -> Callable[..., Network]:
        """
        Load a builder from module path.

        Args:
            module_path: e.g., "core_engine.crn.examples:gene_expression"

        Returns:
            Builder callable
        """
        try:
            module_name, function_name = module_path.split(':')
            module = importlib.import_module(module_name)
            return getattr(module, function_name)
        except Exception as e:
            raise ImportError(f"Failed to load network builder from {module_path}: {e}")


def register_builtin_networks():
    """Register the example plants."""
    from core_engine.crn import examples

    NetworkRegistry.register('birth_death', examples.birth_death)
    NetworkRegistry.register('death_process', examples.death_process)
    NetworkRegistry.register('gene_expression', examples.gene_expression)
    NetworkRegistry.register('dimerization', examples.dimerization)
