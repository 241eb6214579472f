"""Model checking of time-bounded multiple-until formulas on CTMCs."""

__version__ = "0.1.0"

from .checker import Variant, check, check_threshold, explain_product  # noqa: E402
from .ctmc import (Ctmc, ExtendedChain, build_extended, restrict_absorbing,  # noqa: E402
                   restrict_final_segment, satisfies, selector)
from .errors import QuerySyntaxError, ValidationError  # noqa: E402
from .formula import (Interval, MultiUntilQuery, ThresholdQuery, format_query,  # noqa: E402
                      parse_query)
from .modelfile import parse_model, read_model, serialize_model  # noqa: E402
from .oracle import TimedPath, estimate, path_satisfies, sample_path  # noqa: E402
from .transient import generator_of, poisson_weights, transient  # noqa: E402
