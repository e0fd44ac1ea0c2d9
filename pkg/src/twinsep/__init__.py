"""Twin primes as a subsequence of the primes: census, decay fits and gap predictions."""

from .errors import TwinsepError
from .predictor import ModelParams, gap_curve, invert_gap_curve
from .sieve import SieveConfig, prime_count, primes_up_to
from .stats import fit_decay, fit_m0, high_jumper
from .twins import enumerate_twins, record_gaps, separations

__version__ = "0.1.0"
