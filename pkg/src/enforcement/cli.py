"""Command-line entry point: ``enforcement <command> [options]``."""

from __future__ import annotations

import argparse
import csv
import io
import sys
from typing import Callable, Sequence

from . import contracts, experiments
from .constrained import constrained_greedy, quota_violations, validate_hierarchy
from .errors import EnforcementError, SizeError
from .heterogeneous import greedy_payoff_het, greedy_revenue_het
from .homogeneous import greedy_payoff, greedy_revenue, ptas_payoff
from .model import PAYOFF, REVENUE, TOL, Contract, Instance, ObjectiveMode, validate_strategy
from .oracles import grid_oracle, knapsack_lp_bound, structural_oracle
from .result import SolveResult
from .scenario import Scenario, load_scenario

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT = 0, 1, 2


def fmt(value: float) -> str:
    return f"{value:.12g}"


class _Out:
    def __init__(self, path: str | None) -> None:
        self.path = path
        self.buffer = io.StringIO()

    def close(self) -> None:
        text = self.buffer.getvalue()
        if self.path:
            with open(self.path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)


def _write_strategy(out: _Out, instance: Instance, result: SolveResult, label: str) -> None:
    out.buffer.write(
        f"# {label} value={fmt(result.objective_value)} branch={result.branch.value} budget={fmt(result.budget)}\n"
    )
    writer = csv.writer(out.buffer, lineterminator="\n")
    writer.writerow(["location", "sigma"])
    for loc_id in instance.ids:
        writer.writerow([loc_id, fmt(result.strategy.alloc[loc_id])])


def _instance(args: argparse.Namespace) -> tuple[Scenario, Instance]:
    scenario = load_scenario(args.input)
    inst = scenario.instance
    if getattr(args, "budget", None) is not None:
        inst = inst.with_budget(args.budget)
    if getattr(args, "augment", None):
        inst = inst.with_budget(inst.budget + args.augment)
    return scenario, inst


def cmd_solve(args: argparse.Namespace) -> int:
    _, inst = _instance(args)
    if args.objective == "revenue":
        result = greedy_revenue(inst) if inst.is_homogeneous else greedy_revenue_het(inst)
    else:
        result = greedy_payoff(inst) if inst.is_homogeneous else greedy_payoff_het(inst)
    out = _Out(args.output)
    _write_strategy(out, inst, result, f"objective={args.objective}")
    out.close()
    print(f"value {fmt(result.objective_value)}", file=sys.stderr)
    return EXIT_OK


def cmd_ptas(args: argparse.Namespace) -> int:
    _, inst = _instance(args)
    result = ptas_payoff(inst, args.m, args.delta)
    out = _Out(args.output)
    _write_strategy(out, inst, result, f"objective=payoff ptas m={args.m} delta={fmt(args.delta)}")
    out.close()
    return EXIT_OK


def cmd_contract(args: argparse.Namespace) -> int:
    scenario, inst = _instance(args)
    step = args.step if args.step is not None else (scenario.contract_step or 0.05)
    runner = contracts.dense_sample_oracle if args.oracle else contracts.dense_sample
    best, sweep = runner(inst, step)
    out = _Out(args.output)
    out.buffer.write(f"# best alpha={fmt(best.alpha)} principal_objective={fmt(best.principal_objective)}\n")
    writer = csv.writer(out.buffer, lineterminator="\n")
    writer.writerow(["alpha", "revenue", "payoff", "admin_objective", "principal_objective"])
    for o in sweep:
        writer.writerow([fmt(o.alpha), fmt(o.revenue), fmt(o.payoff), fmt(o.admin_objective), fmt(o.principal_objective)])
    out.close()
    return EXIT_OK


def cmd_constrained(args: argparse.Namespace) -> int:
    scenario, inst = _instance(args)
    hierarchy = validate_hierarchy(scenario.constraints, inst)
    result = constrained_greedy(inst, hierarchy)
    out = _Out(args.output)
    _write_strategy(out, inst, result, "objective=payoff constrained")
    out.close()
    return EXIT_OK


def _mode(name: str, alpha: float | None) -> ObjectiveMode:
    if name == "revenue":
        return REVENUE
    if name == "payoff":
        return PAYOFF
    return Contract(alpha if alpha is not None else 0.5)


def cmd_oracle(args: argparse.Namespace) -> int:
    scenario, inst = _instance(args)
    mode = _mode(args.objective, args.alpha)
    if args.method == "structural":
        result = structural_oracle(inst, mode)
        label = f"objective={mode} oracle=structural"
    else:
        result = grid_oracle(inst, args.step, scenario.constraints or None, mode)
        label = f"objective={mode} oracle=grid step={fmt(args.step)} error_bound={fmt(result.error_bound)}"
    out = _Out(args.output)
    _write_strategy(out, inst, result, label)
    out.close()
    return EXIT_OK


def verify_laws(scenario: Scenario) -> list[tuple[str, bool | None, str]]:
    """(law, held?, detail); held is None when the law does not apply."""
    inst = scenario.instance
    laws: list[tuple[str, bool | None, str]] = []

    def check(name: str, fn: Callable[[], tuple[bool, str]]) -> None:
        try:
            ok, detail = fn()
        except SizeError as exc:
            laws.append((name, None, str(exc)))
            return
        laws.append((name, ok, detail))

    def feasible(result: SolveResult, budget: float) -> bool:
        return not validate_strategy(inst, result.strategy, budget)

    def ge(a: float, b: float) -> bool:
        return a >= b - TOL

    plus_one = inst.with_budget(inst.budget + 1)
    if inst.is_homogeneous:
        def rev_exact():
            g, o = greedy_revenue(inst), structural_oracle(inst, REVENUE)
            return abs(g.objective_value - o.objective_value) <= TOL and feasible(g, inst.budget), \
                f"greedy={fmt(g.objective_value)} oracle={fmt(o.objective_value)}"

        def pay_half():
            g, o = greedy_payoff(inst), structural_oracle(inst, PAYOFF)
            return ge(g.objective_value, 0.5 * o.objective_value) and feasible(g, inst.budget), \
                f"greedy={fmt(g.objective_value)} oracle={fmt(o.objective_value)}"

        def pay_augmented():
            g, o = greedy_payoff(plus_one), structural_oracle(inst, PAYOFF)
            return ge(g.objective_value, o.objective_value), \
                f"greedy(R+1)={fmt(g.objective_value)} oracle(R)={fmt(o.objective_value)}"

        def sandwich():
            g = greedy_payoff(inst).objective_value
            o = structural_oracle(inst, PAYOFF).objective_value
            b = knapsack_lp_bound(inst)
            ok = ge(2 * g, b) and ge(b, o) and ge(o, g)
            return ok, f"2g={fmt(2 * g)} bound={fmt(b)} oracle={fmt(o)} greedy={fmt(g)}"

        def ptas():
            p, o = ptas_payoff(inst, 1, 0.5), structural_oracle(inst, PAYOFF)
            return ge(p.objective_value, 0.5 * o.objective_value), \
                f"ptas={fmt(p.objective_value)} oracle={fmt(o.objective_value)}"

        check("greedy_revenue == oracle", rev_exact)
        check("greedy_payoff >= 0.5 * oracle", pay_half)
        check("greedy_payoff(R+1) >= oracle(R)", pay_augmented)
        check("2*greedy >= knapsack bound >= oracle >= greedy", sandwich)
        check("ptas(m=1, delta=1/2) >= 0.5 * oracle", ptas)
        if inst.deter_prob == 1.0:
            for alpha in (0.0, 0.5, 1.0):
                def contract_half(alpha=alpha):
                    c = contracts.contract_greedy(inst, alpha)
                    o = structural_oracle(inst, Contract(alpha))
                    return ge(c.admin_objective, 0.5 * o.objective_value), \
                        f"greedy={fmt(c.admin_objective)} oracle={fmt(o.objective_value)}"

                check(f"contract_greedy(alpha={alpha:g}) >= 0.5 * oracle", contract_half)

    for solver, mode, name in ((greedy_revenue_het, REVENUE, "revenue"), (greedy_payoff_het, PAYOFF, "payoff")):
        def het_half(solver=solver, mode=mode):
            g, o = solver(inst), structural_oracle(inst, mode)
            return ge(g.objective_value, 0.5 * o.objective_value) and feasible(g, inst.budget), \
                f"greedy={fmt(g.objective_value)} oracle={fmt(o.objective_value)}"

        def het_augmented(solver=solver, mode=mode):
            g, o = solver(plus_one), structural_oracle(inst, mode)
            return ge(g.objective_value, o.objective_value), \
                f"greedy(R+1)={fmt(g.objective_value)} oracle(R)={fmt(o.objective_value)}"

        check(f"greedy_{name}_het >= 0.5 * oracle", het_half)
        check(f"greedy_{name}_het(R+1) >= oracle(R)", het_augmented)

    if scenario.constraints:
        def respects_quotas():
            h = validate_hierarchy(scenario.constraints, inst)
            r = constrained_greedy(inst, h)
            problems = quota_violations(inst, r.strategy, scenario.constraints) + validate_strategy(inst, r.strategy)
            return not problems, "; ".join(problems) or f"value={fmt(r.objective_value)}"

        check("constrained_greedy respects every quota", respects_quotas)
    return laws


def cmd_verify(args: argparse.Namespace) -> int:
    scenario, _ = _instance(args)
    failed = False
    for name, ok, detail in verify_laws(scenario):
        tag = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
        failed |= ok is False
        print(f"{tag} {name} ({detail})")
    return EXIT_VIOLATION if failed else EXIT_OK


def cmd_experiment(args: argparse.Namespace) -> int:
    out = _Out(args.output)
    if args.synthetic_ipt:
        if args.seed is None:
            raise EnforcementError("--synthetic-ipt requires --seed")
        inst = experiments.synthetic_ipt(args.seed, fine=args.fine, budget=args.budget or 10.0)
        out.buffer.write(
            f"# synthetic-ipt seed={args.seed} locations={len(inst.locations)} "
            f"counts~Exp(mean={experiments.MEAN_COUNT:g}) benefits~Exp(mean={experiments.MEAN_BENEFIT:g}) "
            f"fine={fmt(inst.fine)} budget={fmt(inst.budget)}\n"
        )
        status_quo, fracs = experiments.synthetic_status_quo(inst, args.seed)
        exp = None
    elif args.input:
        scenario, inst = _instance(args)
        exp = scenario.experiment
        status_quo = {r.id: r.sigma for r in exp.status_quo} if exp else {}
        fracs = {r.id: list(r.citation_frac) for r in exp.status_quo} if exp else {}
    else:
        raise EnforcementError("experiment needs --input or --synthetic-ipt")

    counterfactual = args.counterfactual or (exp.counterfactual if exp else None) or "threshold"
    writer = csv.writer(out.buffer, lineterminator="\n")
    if counterfactual == "threshold":
        fractions = args.strategic_frac or ([exp.strategic_frac] if exp and exp.strategic_frac is not None else None)
        fractions = fractions or [round(0.1 * j, 10) for j in range(11)]
        _, rows = experiments.counterfactual_threshold(inst, fractions)
        writer.writerow(["strategic_frac", "greedy", "uniform", "no_enforcement", "total"])
        for r in rows:
            writer.writerow([fmt(r.strategic_frac), fmt(r.greedy), fmt(r.uniform), fmt(r.no_enforcement), fmt(r.total)])
    else:
        missing = [loc_id for loc_id in inst.ids if loc_id not in status_quo]
        if missing:
            raise EnforcementError(f"experiment.status_quo lacks locations {missing}")
        mults = args.citation_multiplier or (
            [exp.citation_multiplier] if exp and exp.citation_multiplier is not None else [0.5, 1.0, 1.5, 2.0]
        )
        rows = experiments.counterfactual_exponential(inst, status_quo, fracs, mults)
        writer.writerow(["citation_multiplier", "greedy_exponential", "status_quo", "uniform", "greedy_threshold", "total"])
        for r in rows:
            writer.writerow([
                fmt(r.citation_multiplier), fmt(r.greedy_exponential), fmt(r.status_quo),
                fmt(r.uniform), fmt(r.greedy_threshold), fmt(r.total),
            ])
    out.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="enforcement", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, fn, help_text: str, needs_input: bool = True) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=fn)
        p.add_argument("--input", required=needs_input, help="scenario JSON file")
        p.add_argument("--output", help="write CSV here instead of stdout")
        p.add_argument("--budget", type=float, help="override the scenario budget")
        return p

    p = add("solve", cmd_solve, "greedy solver for revenue or payoff")
    p.add_argument("--objective", choices=["revenue", "payoff"], default="payoff")
    p.add_argument("--augment", type=float, default=0.0, help="extra resources added to the budget")

    p = add("ptas", cmd_ptas, "approximation scheme for homogeneous payoff")
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--delta", type=float, default=None)

    p = add("contract", cmd_contract, "contract sweep over alpha")
    p.add_argument("--step", type=float)
    p.add_argument("--oracle", action="store_true", help="use exact strategies per alpha")

    add("constrained", cmd_constrained, "greedy under the scenario's quota constraints")

    p = add("oracle", cmd_oracle, "exact or grid ground truth for small scenarios")
    p.add_argument("--method", choices=["structural", "grid"], default="structural")
    p.add_argument("--step", type=float, default=0.005)
    p.add_argument("--objective", choices=["revenue", "payoff", "contract"], default="payoff")
    p.add_argument("--alpha", type=float)

    add("verify", cmd_verify, "check solver guarantees against the oracles")

    p = add("experiment", cmd_experiment, "parking counterfactual earnings", needs_input=False)
    p.add_argument("--counterfactual", choices=["threshold", "exponential"])
    p.add_argument("--strategic-frac", type=float, action="append")
    p.add_argument("--citation-multiplier", type=float, action="append")
    p.add_argument("--synthetic-ipt", action="store_true", help="generate the 448-location synthetic population")
    p.add_argument("--seed", type=int)
    p.add_argument("--fine", type=float, default=100.0)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "ptas" and args.delta is None:
        args.delta = 1.0 / (args.m + 1)
    try:
        return args.func(args)
    except (EnforcementError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def run_command(argv: Sequence[str]) -> int:
    try:
        return main(argv)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code) if isinstance(exc.code, int) else EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
