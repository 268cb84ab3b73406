"""Static price and assortment calendars for finite-horizon, finite-inventory revenue management.

Typical use::

    from staticrm import load_fixture, solve_upper_bound, build_policy, exact_expected_revenue

    fx = load_fixture("two-price")
    sol = solve_upper_bound(fx.instance)
    cal = build_policy("alg1", fx.instance, sol)
    exact_expected_revenue(cal, fx.instance)
"""

from .bounds import GuaranteeReport, delta_apx, guarantee_report, poisson_floor, reservation_delta
from .calendar import DeterministicCalendar, RandomizedCalendar
from .config import build_instance, load_instance
from .derand import DerandConfig, derandomize, sample_count
from .errors import (
    AssumptionViolation, NumericalError, StateSpaceTooLarge, ValidationError, ZeroMeanDemand,
)
from .evaluate import DpValue, RevenueStats, exact_expected_revenue, optimal_dp, simulate, upper_bound_check
from .fixtures import list_fixtures, load_fixture, synthetic_instance, verify_fixture
from .lp import (
    LinearProgram, LpSolution, TwoPriceSupport, build_cdlp_n, build_cdlp_s, build_dlp_n, build_dlp_s,
    item_contributions, solve_lp, solve_upper_bound, two_price_support,
)
from .model import (
    AssortmentFamily, ChoiceModel, DemandDistribution, Instance, MixtureMNL, Product, RankedList,
    TableChoice, enumerate_assortments, single_item_instance,
)
from .policies import (
    bid_price_calendar, build_policy, high_low_calendar, large_inventory_policy, lp_solution_policy,
    myopic_policy, nonstationary_threshold_policy, stationary_randomized_policy,
)

__version__ = "0.1.0"
