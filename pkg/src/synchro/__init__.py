"""Analysis of synchronizing automata: reset words, extension words and collections."""

from .core import LAMBDA, Automaton, Budget, StateSet, format_word, parse_word
from .errors import (
    BoundAnomaly, BudgetExceeded, ExtensionFailure, InputError, NotSynchronizingError,
    ParseError, SynchroError,
)
from .extension import (
    EAInput, EATrace, check_local_extension, ea_input, extension_radius, is_extendable, run_ea,
    shortest_extension_word,
)
from .families import (
    b_series, c_b, carpi_family, cerny, random_automaton, unstable_by_b, verify_proposition,
)
from .formats import export_dot, parse_automaton, serialize_automaton
from .reset import greedy_compress, pair_merge_word, shortest_reset_word
from .transitivity import (
    WordCollection, balanced_witness_from_independent, independent_from_synch,
    is_balanced, is_independent, min_independent_length, search_balanced_collection,
    synch_via_independent,
)

__version__ = "0.1.0"
