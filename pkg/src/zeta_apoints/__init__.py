"""a-points of zeta^(k) and the equidistribution of {f(gamma)} modulo one."""
from .apoint_engine import APoint, StripWindow, count_in_window, locate_apoints, refine
from .counting import GeneralCountingModel, general_main_term, main_term, n_ak, residual_curve
from .equidist import ModOneSequence, star_discrepancy, trend_report, weyl_sum
from .families import FunctionFamily, check_conditions, classify_power_log, eval_f, parse_family
from .oscillatory import OscillatoryTestCase, compute_S1, decompose, first_derivative_check
from .zeta_kernel import TargetSpec, eval_shifted, eval_zeta_derivative

__version__ = "0.1.0"
