"""Template-based forward reaction prediction."""

from .react import (
    Binding,
    ProductEntry,
    ReactionError,
    apply,
    can_react,
    conservation_violation,
    enumerate_products,
    matches,
)
from .templates import (
    BondEdit,
    ReactionTemplate,
    TemplateRegistry,
    TemplateSyntaxError,
    TemplateValidationError,
    default_registry,
    load_templates,
    parse_templates,
)

__all__ = [
    "Binding", "BondEdit", "ProductEntry", "ReactionError", "ReactionTemplate", "TemplateRegistry",
    "TemplateSyntaxError", "TemplateValidationError", "apply", "can_react", "conservation_violation",
    "default_registry", "enumerate_products", "load_templates", "matches", "parse_templates",
]
