"""wrlab: win-ratio estimation, inference, and trial-design workbench."""

from .core import (Arm, ComparisonResult, Direction, Hierarchy, OutcomeKind,
                   OutcomeSpec, PatientRecord, Verdict, WinStats,
                   compare_at_level, compare_pair, tally_matched,
                   tally_unmatched, win_odds, win_ratio)
from .datagen import (IphakPlan, TtePlan, WeibullParams,
                      exponential_scale_from_dropout, gen_binary_continuous_arm,
                      gen_iphak_arm, gen_tte_arm, gen_tte_composite_arm,
                      substream, weibull_scale_from_survival)
from .design import (SampleSize, mao_power, mao_sample_size, mao_xi0_from_pilot,
                     precision_sample_size, precision_width, tie_sensitivity_table,
                     yu_power, yu_sample_size, yu_sigma_sq)
from .engine import (PowerResult, Scenario, mcse, required_iterations,
                     run_grid, run_scenario, study_presets)
from .inference import (InferenceResult, bootstrap_wr, infer_phi, phi_win,
                        score_test, var_log_wr, var_phi, var_wr_delta,
                        wald_test_log_wr, yu_wald_test)
from .ranksim import RankSimConfig, ranksim_power, simulate_rank_trial, solve_omega
from .stattests import (SurvivalSample, TestResult, TwoByTwoTable,
                        chi_square_test, fisher_exact, log_rank_test, t_test)

__version__ = "0.1.0"

__all__ = [
    "Arm", "ComparisonResult", "Direction", "Hierarchy", "OutcomeKind",
    "OutcomeSpec", "PatientRecord", "Verdict", "WinStats",
    "compare_at_level", "compare_pair", "tally_matched", "tally_unmatched",
    "win_odds", "win_ratio",
    "IphakPlan", "TtePlan", "WeibullParams",
    "exponential_scale_from_dropout", "gen_binary_continuous_arm",
    "gen_iphak_arm", "gen_tte_arm", "gen_tte_composite_arm", "substream",
    "weibull_scale_from_survival",
    "SampleSize", "mao_power", "mao_sample_size", "mao_xi0_from_pilot",
    "precision_sample_size", "precision_width", "tie_sensitivity_table",
    "yu_power", "yu_sample_size", "yu_sigma_sq",
    "PowerResult", "Scenario", "mcse", "required_iterations", "run_grid",
    "run_scenario", "study_presets",
    "InferenceResult", "bootstrap_wr", "infer_phi", "phi_win", "score_test",
    "var_log_wr", "var_phi", "var_wr_delta", "wald_test_log_wr", "yu_wald_test",
    "RankSimConfig", "ranksim_power", "simulate_rank_trial", "solve_omega",
    "SurvivalSample", "TestResult", "TwoByTwoTable", "chi_square_test",
    "fisher_exact", "log_rank_test", "t_test",
]
