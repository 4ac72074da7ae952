"""Model assembly, exports, and the solution checker."""

from __future__ import annotations

import pytest

from cssnd.analysis import compute_requirements
from cssnd.core import (
    CssndError,
    build_time_space_network,
    expand_commodities,
)
from cssnd.dmam import run_dmam, solution_to_assignment
from cssnd.instgen import generate_instance
from cssnd.model import (
    ModelIR,
    ModelOptions,
    build_mip,
    check_solution,
    count_schema,
    export_lp,
    export_mps,
    read_solution,
    var_p,
    var_s,
    var_x,
)
from cssnd.rng import Stream
from tests.conftest import make_sample_instance


@pytest.fixture(scope="module")
def sample_model():
    instance = make_sample_instance()
    tsn = build_time_space_network(instance.physical, instance.period_count)
    tcs, _ = expand_commodities(instance)
    analysis = compute_requirements(instance)
    return instance, tsn, tcs, analysis


def test_variable_counts_on_sample(sample_model):
    instance, tsn, tcs, _ = sample_model
    model = build_mip(instance, tsn, tcs)
    kinds = {}
    for v in model.variables:
        kinds[v.name[0]] = kinds.get(v.name[0], 0) + 1
    assert kinds["y"] == 12 * 175 == 2100
    assert kinds["d"] == 12
    assert kinds["p"] == 30
    assert kinds["s"] == 140 * 30 == 4200
    assert kinds["x"] == (175 + 140) * 30 == 9450


def test_row_counts_match_schema(sample_model):
    instance, tsn, tcs, analysis = sample_model
    for options in (
        ModelOptions(),
        ModelOptions(add_vi_gamma=True, add_vi_phi=True),
        ModelOptions(strong_forcing=True),
        ModelOptions(near_opt=frozenset({23}), shift_restriction=0.25),
    ):
        model = build_mip(instance, tsn, tcs, analysis=analysis, options=options)
        schema = count_schema(instance, tsn, tcs, options)
        assert len(model.variables) == schema["variables"]
        assert len(model.constraints) == schema["rows"]


def test_vi_gamma_row_value(sample_model):
    instance, tsn, tcs, analysis = sample_model
    base = build_mip(instance, tsn, tcs)
    with_vi = build_mip(
        instance, tsn, tcs, analysis=analysis,
        options=ModelOptions(add_vi_gamma=True),
    )
    added = [c for c in with_vi.constraints if c.name == "vi_gamma"]
    assert len(with_vi.constraints) == len(base.constraints) + 1
    assert added[0].rhs == 2.0
    assert added[0].sense == ">="


def test_vi_phi_adds_period_rows(sample_model):
    instance, tsn, tcs, analysis = sample_model
    base = build_mip(instance, tsn, tcs)
    with_vi = build_mip(
        instance, tsn, tcs, analysis=analysis,
        options=ModelOptions(add_vi_phi=True),
    )
    added = [c for c in with_vi.constraints if c.name.startswith("vi_phi")]
    assert len(added) == 7
    assert len(with_vi.constraints) == len(base.constraints) + 7
    assert [c.rhs for c in added] == [4.0, 5.0, 3.0, 4.0, 3.0, 4.0, 2.0]


def test_vi_requires_analysis(sample_model):
    instance, tsn, tcs, _ = sample_model
    with pytest.raises(CssndError):
        build_mip(instance, tsn, tcs, options=ModelOptions(add_vi_gamma=True))


def test_near_opt_both_bounds_warn(sample_model):
    instance, tsn, tcs, analysis = sample_model
    with pytest.warns(UserWarning):
        build_mip(
            instance, tsn, tcs, analysis=analysis,
            options=ModelOptions(near_opt=frozenset({21, 22})),
        )


def test_shift_cap_zero_forces_on_time(sample_model):
    instance, tsn, tcs, _ = sample_model
    model = build_mip(
        instance, tsn, tcs, options=ModelOptions(shift_restriction=0.0)
    )
    row = next(c for c in model.constraints if c.name == "shift_cap")
    assert row.rhs == 0.0
    shifted = {var_p(tc.id) for tc in tcs if tc.kind != "original"}
    assert {name for _, name in row.terms} == shifted


def test_constraint_count_formulas(sample_model):
    instance, tsn, tcs, _ = sample_model
    model = build_mip(instance, tsn, tcs)
    by_family = {}
    for row in model.constraints:
        family = row.name.split("_")[0]
        by_family[family] = by_family.get(family, 0) + 1
    from cssnd.analysis import beta_support

    assert by_family["transit"] == sum(
        7 - len(beta_support(tc, 7)) for tc in tcs
    )
    assert by_family["assign"] == 12 * 7
    assert by_family["balance"] == 12 * 35
    assert by_family["svc"] == 140
    assert by_family["cover"] == 10
    assert by_family["flow"] == 35 * 30
    assert by_family["cap"] == 140
    assert by_family["outsource"] == 140 * 30


def test_lp_export_is_deterministic_and_structured(sample_model):
    instance, tsn, tcs, _ = sample_model
    model = build_mip(instance, tsn, tcs)
    text = export_lp(model)
    assert text == export_lp(model)
    assert text.startswith("Minimize\n obj:")
    assert "\nSubject To\n" in text
    assert "\nBinaries\n" in text
    assert text.endswith("End\n")


def test_lp_export_empty_model():
    assert export_lp(ModelIR()) == "Minimize\n obj: 0\nSubject To\nEnd\n"


def test_lp_binary_section_lists_binaries(sample_model):
    instance, tsn, tcs, _ = sample_model
    model = build_mip(instance, tsn, tcs)
    binary_block = export_lp(model).split("Binaries\n")[1]
    assert "d_v1" in binary_block
    assert " x_" not in binary_block


def test_mps_export_renames_with_sidecar(sample_model):
    instance, tsn, tcs, _ = sample_model
    model = build_mip(instance, tsn, tcs)
    text, sidecar = export_mps(model)
    assert text == export_mps(model)[0]
    assert text.startswith("NAME")
    assert text.rstrip().endswith("ENDATA")
    assert len(sidecar) == len(model.variables) + len(model.constraints)
    assert all(len(short) <= 8 for short in sidecar)
    # every renamed row/column resolves back to a real name
    originals = set(sidecar.values())
    assert model.variables[0].name in originals
    assert model.constraints[0].name in originals


def test_read_solution_parses_and_rejects():
    values = read_solution("# comment\nd_v1 1\nx_k1_a2 0.5\n\n")
    assert values == {"d_v1": 1.0, "x_k1_a2": 0.5}
    with pytest.raises(CssndError):
        read_solution("oops")
    with pytest.raises(CssndError):
        read_solution("name notanumber")


def test_all_zero_assignment_violates_cover(sample_model):
    instance, tsn, tcs, _ = sample_model
    model = build_mip(instance, tsn, tcs)
    result = check_solution(instance, tsn, tcs, model, {})
    assert not result.feasible
    assert any(v.startswith("cover_") for v in result.violations)


def test_dmam_schedule_checks_out(sample_model):
    instance, tsn, tcs, _ = sample_model
    model = build_mip(instance, tsn, tcs)
    solution, report = run_dmam(instance, "a", tsn=tsn)
    assignment = solution_to_assignment(solution)
    result = check_solution(instance, tsn, tcs, model, assignment)
    assert result.feasible, result.violations[:5]
    assert result.objective == pytest.approx(report["total_cost"], abs=1e-6)
    assert result.summary["owned_used"] == report["owned_used"]
    assert result.summary["on_time"] == report["on_time"]
    assert result.summary["outsourced"] == report["outsourced"]


def test_double_selection_is_feasible_but_flagged(sample_model):
    instance, tsn, tcs, _ = sample_model
    model = build_mip(instance, tsn, tcs)
    solution, _ = run_dmam(instance, "r", tsn=tsn)
    assignment = solution_to_assignment(solution)
    # additionally deliver commodity 1 through its tardy variant, outsourced
    spare = next(
        p
        for p in solution.book.oc_paths(1)
        if p.mode == "outsourced" and p.kind == "tardy"
    )
    tc = solution.book.tc_of(spare)
    assignment[var_p(tc.id)] = 1.0
    arc_id = spare.arcs[0]
    assignment[var_s(tc.id, arc_id)] = 1.0
    assignment[var_x(tc.id, arc_id)] = tc.volume
    t = spare.arrival_period
    while t != tc.due_period:
        hold = tsn.holding_arc(tc.dest_physical, t)
        assignment[var_x(tc.id, hold.id)] = tc.volume
        t = t % 7 + 1
    result = check_solution(instance, tsn, tcs, model, assignment)
    assert result.feasible, result.violations[:5]
    assert result.summary["multi_selected"] == 1


def test_vi_rows_hold_for_dedicated_schedules():
    """Randomized feasible schedules (random variant and chain shape, one
    asset per delivery) must satisfy the profile inequalities whenever the
    base rows hold."""
    stream = Stream(4242, "vi-validity")
    checked = 0
    for trial in range(12):
        size = ("small", "medium")[trial % 2]
        k = (10, 20)[trial % 2]
        instance = generate_instance(size, k, seed=500 + trial)
        tsn = build_time_space_network(instance.physical, instance.period_count)
        tcs, _ = expand_commodities(instance)
        analysis = compute_requirements(instance)
        model = build_mip(
            instance, tsn, tcs, analysis=analysis,
            options=ModelOptions(add_vi_gamma=True, add_vi_phi=True),
        )
        from cssnd.dmam import (
            AssetCycle,
            PathBook,
            Solution,
            _single_leg,
            finalize_cycles,
            resolve_capacity,
        )

        book = PathBook(instance, tsn)
        solution = Solution(instance=instance, tsn=tsn, book=book)
        for oc in instance.commodities:
            offered = [p for p in book.oc_paths(oc.id) if p.mode == "offered"]
            usable = [
                p
                for p in offered
                if p.arcs[p.lead_holds] not in solution.svc_registry
            ]
            path = usable[stream.randint(0, len(usable) - 1)]
            solution.selected[oc.id] = path
            solution.svc_registry[path.arcs[path.lead_holds]] = path.id
            solution.cycles.append(AssetCycle(legs=[_single_leg(path)]))
        resolve_capacity(solution)
        finalize_cycles(solution)
        assignment = solution_to_assignment(solution)
        result = check_solution(instance, tsn, tcs, model, assignment)
        assert result.feasible, result.violations[:5]
        checked += 1
    assert checked == 12


def test_vi_phi_can_cut_heavily_merged_schedules():
    """Boundary of the profile bound: a feasible schedule that packs two
    deliveries per asset can drop below the closed-window profile.  The
    base rows must stay satisfied; only profile rows may trip."""
    instance = generate_instance("small", 10, seed=1000)
    tsn = build_time_space_network(instance.physical, instance.period_count)
    tcs, _ = expand_commodities(instance)
    analysis = compute_requirements(instance)
    model = build_mip(
        instance, tsn, tcs, analysis=analysis,
        options=ModelOptions(add_vi_gamma=True, add_vi_phi=True),
    )
    solution, _ = run_dmam(instance, "a", tsn=tsn)
    result = check_solution(
        instance, tsn, tcs, model, solution_to_assignment(solution)
    )
    base = [v for v in result.violations if not v.startswith("vi_")]
    profile = [v for v in result.violations if v.startswith("vi_")]
    assert base == []
    assert profile, "expected this seed to expose the profile boundary"


def test_in_transit_profile_is_tighter():
    instance = make_sample_instance()
    full = compute_requirements(instance)
    transit = compute_requirements(instance, in_transit=True)
    assert all(a <= b for a, b in zip(transit.phi, full.phi))
    assert transit.theta <= full.theta
