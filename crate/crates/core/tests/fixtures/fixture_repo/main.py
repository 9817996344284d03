"""Pipeline entry point."""

from parser import Parser
from renderer import Renderer


def run(text):
    """Parse text and render the result."""
    parser = Parser()
    renderer = Renderer()
    tokens = parser.parse(text)
    return renderer.render(tokens)
