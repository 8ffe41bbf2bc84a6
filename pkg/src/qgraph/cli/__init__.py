"""Graph specification files and the ``qgraph`` command."""
from .main import build_parser, main
from .specfile import GraphSpec, example_spec, load, loads, spec_of_graph

__all__ = ["GraphSpec", "build_parser", "example_spec", "load", "loads", "main", "spec_of_graph"]
