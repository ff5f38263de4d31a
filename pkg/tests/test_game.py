"""Mechanics tests: tier boxes, profile application, payoffs, draws."""

import itertools

import numpy as np
import pytest

from netprotect.game import (
    ACTION_ORDER,
    Action,
    BallBox,
    GameError,
    GameParameters,
    Position,
    POSITIONS,
    Topology,
    Treatment,
    TREATMENTS,
    apply_profile,
    default_topology,
    draw_ball,
    expected_payoff,
    initial_box,
    loss_probability,
    realize_round,
)

from oracle import oracle_boxes, oracle_expected_payoff

TOPO = default_topology()
PARAMS = GameParameters()
EDGES = [(a.value, b.value) for a, b in TOPO.edges]


def profile_from(**overrides) -> dict:
    prof = {p: Action.NO_BUY for p in POSITIONS}
    for label, action in overrides.items():
        prof[Position(label)] = action
    return prof


def as_choice_strings(profile) -> dict:
    return {p.value: a.value for p, a in profile.items()}


class TestInitialBox:
    def test_tier_compositions(self):
        assert initial_box(1).as_tuple() == (15, 25, 60)
        assert initial_box(2).as_tuple() == (30, 25, 45)
        assert initial_box(3).as_tuple() == (45, 25, 30)

    def test_tier_loss_probabilities(self):
        assert loss_probability(initial_box(1)) == pytest.approx(0.40)
        assert loss_probability(initial_box(2)) == pytest.approx(0.55)
        assert loss_probability(initial_box(3)) == pytest.approx(0.70)

    def test_degree_out_of_range(self):
        with pytest.raises(GameError):
            initial_box(0)
        with pytest.raises(GameError):
            initial_box(4)


class TestTopology:
    def test_default_degrees(self):
        degs = [TOPO.degree(p) for p in POSITIONS]
        assert degs == [1, 3, 2, 3, 2, 1]

    def test_default_neighbors(self):
        assert TOPO.neighbors(Position.A) == {Position.B}
        assert TOPO.neighbors(Position.D) == {Position.B, Position.C, Position.E}

    def test_alternative_edge_set_accepted(self):
        Topology((("A", "B"), ("B", "C"), ("B", "D"), ("C", "E"), ("D", "E"), ("D", "F")))

    def test_wrong_degree_sequence_rejected(self):
        with pytest.raises(GameError):
            Topology((("A", "B"), ("A", "C"), ("B", "D"), ("C", "D"), ("D", "E"), ("E", "F")))

    def test_self_loop_rejected(self):
        with pytest.raises(GameError):
            Topology((("A", "A"), ("B", "C"), ("B", "D"), ("C", "D"), ("D", "E"), ("E", "F")))


class TestBallBox:
    def test_must_sum_to_100(self):
        with pytest.raises(GameError):
            BallBox(50, 50, 50)

    def test_no_negative_counts(self):
        with pytest.raises(GameError):
            BallBox(-1, 41, 60)

    def test_all_green_is_safe(self):
        assert loss_probability(BallBox(0, 0, 100)) == 0.0

    def test_high_tier(self):
        assert loss_probability(BallBox(45, 25, 30)) == pytest.approx(0.70)


class TestApplyProfile:
    def test_bas_ind_own_effect_only(self):
        treatment = Treatment.from_label("bas-ind")
        prof = profile_from(D=Action.TOKEN_X)
        boxes = apply_profile(TOPO, treatment, PARAMS, prof)
        assert boxes[Position.D].as_tuple() == (15, 25, 60)
        for p in POSITIONS:
            if p is not Position.D:
                assert boxes[p] == initial_box(TOPO.degree(p))

    def test_bas_net_single_buyer(self):
        # Frozen from the independent oracle: B (degree 3) buys X; A and C and D
        # are B's neighbours and also receive the 10-red conversion.
        treatment = Treatment.from_label("bas-net")
        prof = profile_from(B=Action.TOKEN_X)
        boxes = apply_profile(TOPO, treatment, PARAMS, prof)
        expected = {
            "A": (5, 20, 75),
            "B": (15, 25, 60),
            "C": (20, 20, 60),
            "D": (35, 20, 45),
            "E": (30, 20, 50),
            "F": (15, 20, 65),
        }
        for label, tup in expected.items():
            assert boxes[Position(label)].as_tuple() == tup

    def test_dec_net_single_y_buyer(self):
        # Frozen from the independent oracle: C (degree 2) buys Y.
        treatment = Treatment.from_label("dec-net")
        prof = profile_from(C=Action.TOKEN_Y)
        boxes = apply_profile(TOPO, treatment, PARAMS, prof)
        expected = {
            "A": (15, 20, 65),
            "B": (37, 20, 43),
            "C": (14, 25, 61),
            "D": (37, 20, 43),
            "E": (30, 20, 50),
            "F": (15, 20, 65),
        }
        for label, tup in expected.items():
            assert boxes[Position(label)].as_tuple() == tup

    def test_y_buyer_receives_2_red_per_x_neighbour(self):
        treatment = Treatment.from_label("dec-net")
        prof = profile_from(C=Action.TOKEN_Y, B=Action.TOKEN_X, D=Action.TOKEN_X)
        boxes = apply_profile(TOPO, treatment, PARAMS, prof)
        # C: own Y 16 red, 2 red per X neighbour (B, D), brown 5 per other buyer (B, D)
        assert boxes[Position.C].as_tuple() == (30 - 16 - 4, 25 - 10, 45 + 30)

    def test_y_brown_includes_self_flag(self):
        params = GameParameters(y_brown_includes_self=True)
        treatment = Treatment.from_label("dec-net")
        prof = profile_from(C=Action.TOKEN_Y)
        boxes = apply_profile(TOPO, treatment, params, prof)
        assert boxes[Position.C].as_tuple() == (14, 20, 66)

    def test_rejects_token_y_without_decoy(self):
        with pytest.raises(GameError):
            apply_profile(TOPO, Treatment.from_label("bas-net"), PARAMS,
                          profile_from(A=Action.TOKEN_Y))

    def test_rejects_incomplete_profile(self):
        prof = {Position.A: Action.NO_BUY}
        with pytest.raises(GameError):
            apply_profile(TOPO, Treatment.from_label("bas-ind"), PARAMS, prof)

    @pytest.mark.parametrize("treatment", TREATMENTS, ids=lambda t: t.label)
    def test_matches_oracle_on_every_profile(self, treatment):
        actions = treatment.actions()
        for combo in itertools.product(actions, repeat=6):
            prof = dict(zip(POSITIONS, combo))
            ours = apply_profile(TOPO, treatment, PARAMS, prof)
            ref = oracle_boxes(EDGES, treatment.externalities, treatment.decoy,
                               as_choice_strings(prof))
            for p in POSITIONS:
                assert ours[p].as_tuple() == (
                    ref[p.value]["red"], ref[p.value]["brown"], ref[p.value]["green"]
                ), f"{treatment.label} {combo} {p}"


class TestProfileSweepInvariants:
    @pytest.mark.parametrize("treatment", TREATMENTS, ids=lambda t: t.label)
    def test_box_sums_and_green_monotone(self, treatment):
        for combo in itertools.product(treatment.actions(), repeat=6):
            prof = dict(zip(POSITIONS, combo))
            boxes = apply_profile(TOPO, treatment, PARAMS, prof)
            for p in POSITIONS:
                box = boxes[p]
                assert box.red + box.brown + box.green == 100
                assert min(box.as_tuple()) >= 0
                assert box.green >= initial_box(TOPO.degree(p)).green

    @pytest.mark.parametrize("treatment", TREATMENTS, ids=lambda t: t.label)
    def test_clamping_never_binds_under_default_parameters(self, treatment):
        # Every requested conversion must be fully satisfiable: recompute with
        # an unclamped tally and compare against the clamped result.
        for combo in itertools.product(treatment.actions(), repeat=6):
            prof = dict(zip(POSITIONS, combo))
            boxes = apply_profile(TOPO, treatment, PARAMS, prof)
            for p in POSITIONS:
                start = initial_box(TOPO.degree(p))
                red_req = PARAMS.own_red_conversion(prof[p], TOPO.degree(p))
                brown_req = 0
                if treatment.externalities:
                    for q in POSITIONS:
                        if prof[q] is not Action.NO_BUY and q != p:
                            brown_req += PARAMS.ext_brown_per_buyer
                    if prof[p] is Action.NO_BUY:
                        for q in TOPO.neighbors(p):
                            if prof[q] is Action.TOKEN_X:
                                red_req += PARAMS.ext_red_x_to_nonbuyer
                            elif prof[q] is Action.TOKEN_Y:
                                red_req += PARAMS.ext_red_y_to_nonbuyer
                    elif prof[p] is Action.TOKEN_Y:
                        for q in TOPO.neighbors(p):
                            if prof[q] is Action.TOKEN_X:
                                red_req += PARAMS.ext_red_x_to_y_buyer
                assert red_req <= start.red
                assert brown_req <= start.brown
                assert boxes[p].as_tuple() == (
                    start.red - red_req, start.brown - brown_req,
                    start.green + red_req + brown_req,
                )

    def test_no_externalities_leaves_nonbuyers_untouched(self):
        for treatment in (Treatment.from_label("bas-ind"), Treatment.from_label("dec-ind")):
            for combo in itertools.product(treatment.actions(), repeat=6):
                prof = dict(zip(POSITIONS, combo))
                boxes = apply_profile(TOPO, treatment, PARAMS, prof)
                for p in POSITIONS:
                    if prof[p] is Action.NO_BUY:
                        assert boxes[p] == initial_box(TOPO.degree(p))

    @pytest.mark.parametrize("treatment", TREATMENTS, ids=lambda t: t.label)
    def test_purchase_never_hurts_others(self, treatment):
        actions = treatment.actions()
        for combo in itertools.product(actions, repeat=6):
            prof = dict(zip(POSITIONS, combo))
            if all(a is not Action.NO_BUY for a in combo):
                continue
            base = apply_profile(TOPO, treatment, PARAMS, prof)
            for i, p in enumerate(POSITIONS):
                if prof[p] is not Action.NO_BUY:
                    continue
                for token in actions[1:]:
                    bumped = dict(prof)
                    bumped[p] = token
                    new = apply_profile(TOPO, treatment, PARAMS, bumped)
                    for q in POSITIONS:
                        if q != p:
                            assert new[q].loss_probability <= base[q].loss_probability + 1e-12

    def test_statewise_dominance_of_x_over_y_in_dec_ind(self):
        treatment = Treatment.from_label("dec-ind")
        for degree, pos in ((1, Position.A), (2, Position.C), (3, Position.B)):
            bx = apply_profile(TOPO, treatment, PARAMS, profile_from(**{pos.value: Action.TOKEN_X}))
            by = apply_profile(TOPO, treatment, PARAMS, profile_from(**{pos.value: Action.TOKEN_Y}))
            assert bx[pos].green > by[pos].green
            assert PARAMS.cost_x < PARAMS.cost_y


class TestExpectedPayoff:
    def test_bas_ind_deg3_no_buy(self):
        prof = profile_from()
        boxes = apply_profile(TOPO, Treatment.from_label("bas-ind"), PARAMS, prof)
        assert expected_payoff(Position.D, prof, boxes, PARAMS) == pytest.approx(80.0)

    def test_bas_ind_deg3_token_x(self):
        prof = profile_from(D=Action.TOKEN_X)
        boxes = apply_profile(TOPO, Treatment.from_label("bas-ind"), PARAMS, prof)
        assert expected_payoff(Position.D, prof, boxes, PARAMS) == pytest.approx(78.0)

    def test_bas_net_free_riding_deg1(self):
        # A's single neighbour B buys X: A free-rides to 150 - 100*(5+20)/100.
        prof = profile_from(B=Action.TOKEN_X)
        boxes = apply_profile(TOPO, Treatment.from_label("bas-net"), PARAMS, prof)
        assert expected_payoff(Position.A, prof, boxes, PARAMS) == pytest.approx(125.0)

    def test_matches_oracle_on_random_profiles(self):
        rng = np.random.default_rng(7)
        treatment = Treatment.from_label("dec-net")
        for _ in range(200):
            combo = [ACTION_ORDER[i] for i in rng.integers(0, 3, size=6)]
            prof = dict(zip(POSITIONS, combo))
            boxes = apply_profile(TOPO, treatment, PARAMS, prof)
            for p in POSITIONS:
                ref = oracle_expected_payoff(EDGES, True, True, as_choice_strings(prof), p.value)
                assert expected_payoff(p, prof, boxes, PARAMS) == pytest.approx(ref, abs=1e-9)


class TestRealizeRound:
    def test_degenerate_all_green(self):
        boxes = {p: BallBox(0, 0, 100) for p in POSITIONS}
        out = realize_round(boxes, profile_from(), PARAMS, np.random.default_rng(0))
        for p in POSITIONS:
            assert out[p].draw == "green"
            assert out[p].payoff == 150

    def test_degenerate_all_red(self):
        boxes = {p: BallBox(100, 0, 0) for p in POSITIONS}
        out = realize_round(boxes, profile_from(), PARAMS, np.random.default_rng(0))
        for p in POSITIONS:
            assert out[p].draw == "red"
            assert out[p].payoff == 50

    def test_deterministic_given_seed(self):
        prof = profile_from(B=Action.TOKEN_X)
        boxes = apply_profile(TOPO, Treatment.from_label("bas-net"), PARAMS, prof)
        a = realize_round(boxes, prof, PARAMS, np.random.default_rng(123))
        b = realize_round(boxes, prof, PARAMS, np.random.default_rng(123))
        assert a == b

    def test_draw_frequencies_match_box(self):
        box = BallBox(45, 25, 30)
        rng = np.random.default_rng(99)
        n = 20_000
        draws = [draw_ball(box, rng) for _ in range(n)]
        assert draws.count("red") / n == pytest.approx(0.45, abs=0.01)
        assert draws.count("brown") / n == pytest.approx(0.25, abs=0.01)

    def test_token_cost_reflected_in_realized_payoff(self):
        boxes = {p: BallBox(0, 0, 100) for p in POSITIONS}
        prof = profile_from(A=Action.TOKEN_X, B=Action.TOKEN_Y)
        treatmentless = realize_round(boxes, prof, PARAMS, np.random.default_rng(1))
        assert treatmentless[Position.A].payoff == 118
        assert treatmentless[Position.B].payoff == 108
