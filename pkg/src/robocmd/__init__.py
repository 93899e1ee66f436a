"""robocmd: command understanding for general-purpose service robots.

Converts natural-language commands into lambda-calculus logical forms via
knowledge-base anonymization and a learned sequence-to-sequence parser, with
a synchronous grammar for corpus generation, two baselines, and an
experiment harness.
"""

__version__ = "0.1.0"

from .logic import (  # noqa: F401
    Application,
    ClassToken,
    Lambda,
    LogicalForm,
    PredicateRegistry,
    StringLit,
    Variable,
    exact_match,
    free_variables,
    lf_to_str,
    parse_lf,
    parse_lf_str,
    print_lf,
    tokenize_lf,
)
from .ontology import Ontology  # noqa: F401
from .anonymizer import AnonymizedCommand, anonymize, deanonymize_command  # noqa: F401
from .deanonymizer import ScriptedResolver, SlotQuery, deanonymize_lf  # noqa: F401
