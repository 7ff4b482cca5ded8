"""Scenario/term/trace syntax: parsing, rendering, and round-trips."""

from __future__ import annotations

import pytest

from promisekit.corpus import corpus_text
from promisekit.dsl import (
    ParseError,
    ValidationError,
    parse_scenario,
    parse_term,
    parse_trace,
    render,
)
from promisekit.explorer import Outcome, Trace
from promisekit.process_algebra import (
    Act,
    AgentVar,
    Alt,
    DEADLOCK,
    DONE,
    ForAllAgents,
    GeneralizedIntroduceEvent,
    Guard,
    HasPromise,
    Implies,
    IntroduceEvent,
    Par,
    Seq,
    TRUE,
    FALSE,
    WithdrawEvent,
    make_protocol,
)
from promisekit.promise_state import EMPTY_STATE, PromiseModel, State

from scenario_gen import random_scenario_text


@pytest.fixture(scope="module")
def plain_model():
    return PromiseModel.create(
        agents=("a", "b", "c"), types=("t",), atoms={"x": "t", "y": "t"}
    )


class TestScenarioParsing:
    def test_ride_scenario(self, ride):
        model = ride.model
        assert [a.name for a in model.agents] == ["ja", "ju", "ma"]
        assert [a.name for a in model.user_atoms()] == ["tbc2JUB"]
        assert model.user_atoms()[0].type.name == "transport"
        assert model.body("~tbc2JUB") in model.exclusiveness.exclusive
        assert ride.initial_state == EMPTY_STATE
        expected = Par(
            make_protocol(model, model.agent("ja"), model.agent("ma"), model.body("tbc2JUB")),
            make_protocol(model, model.agent("ju"), model.agent("ma"), model.body("tbc2JUB")),
        )
        assert ride.entry == expected

    def test_supplier_scenario(self):
        scenario = parse_scenario(corpus_text("isp.promise"))
        model = scenario.model
        assert [a.name for a in model.agents] == ["user", "ISPA", "ISPB"]
        assert model.body("~transport_packets") in model.exclusiveness.exclusive
        assert isinstance(scenario.entry, Par)

    def test_laws_scenario(self):
        scenario = parse_scenario(corpus_text("laws.promise"))
        model = scenario.model
        assert model.order.subordinate(model.agent("intern"), model.agent("boss"))
        assert frozenset({model.body("train"), model.body("car")}) in model.incompatibility.declared
        assert dict(scenario.definitions).keys() == {"offer"}
        assert isinstance(scenario.entry, Alt)

    def test_definitions_expand_in_run(self, plain_model):
        text = (
            "agent a b\n"
            "type t\n"
            "task x : t\n"
            "def offer = pi(a, x, b)\n"
            "run offer . offer\n"
        )
        scenario = parse_scenario(text)
        offer = dict(scenario.definitions)["offer"]
        assert scenario.entry == Seq(offer, offer)

    def test_init_builds_state(self):
        text = (
            "agent a b\n"
            "type t\n"
            "task x : t\n"
            "init pi(a, x, b), pi(b, x, a)\n"
            "run delta\n"
        )
        scenario = parse_scenario(text)
        assert len(scenario.initial_state) == 2

    def test_init_must_be_conflict_free(self):
        text = (
            "agent a b\n"
            "type t\n"
            "task x : t\n"
            "init pi(a, x, b), pi(a, !x, b)\n"
            "run delta\n"
        )
        with pytest.raises(ValidationError):
            parse_scenario(text)

    def test_comments_everywhere(self):
        text = (
            "# leading comment\n"
            "agent a b   # trailing comment\n"
            "type t\n"
            "task x : t\n"
            "task y : t\n"
            "incompatible x # y # a real comment\n"
            "\n"
            "run delta # done\n"
        )
        scenario = parse_scenario(text)
        assert frozenset({scenario.model.body("x"), scenario.model.body("y")}) in (
            scenario.model.incompatibility.declared
        )


class TestScenarioErrors:
    def test_syntax_error_carries_position(self):
        text = "agent a b\ntype t\ntask x t\nrun delta\n"
        with pytest.raises(ParseError) as exc:
            parse_scenario(text)
        assert exc.value.line == 3
        assert 1 <= exc.value.column <= len("task x t") + 1

    def test_unknown_directive(self):
        with pytest.raises(ParseError) as exc:
            parse_scenario("nonsense here\nrun delta\n")
        assert exc.value.line == 1

    def test_reflexive_incompatibility(self):
        text = "agent a\ntype t\ntask x : t\nincompatible x # x\nrun delta\n"
        with pytest.raises(ValidationError):
            parse_scenario(text)

    def test_cross_type_incompatibility(self):
        text = (
            "agent a\ntype t\ntype u\ntask x : t\ntask y : u\n"
            "incompatible x # y\nrun delta\n"
        )
        with pytest.raises(ValidationError):
            parse_scenario(text)

    def test_unknown_agent_in_term(self):
        with pytest.raises(ValidationError):
            parse_scenario("agent a\ntype t\ntask x : t\nrun pi(a, x, ghost)\n")

    def test_unknown_process_reference(self):
        with pytest.raises(ValidationError):
            parse_scenario("agent a\nrun nosuch\n")

    def test_duplicate_definition(self):
        text = "agent a\ntype t\ntask x : t\ndef d = delta\ndef d = delta\nrun d\n"
        with pytest.raises(ValidationError):
            parse_scenario(text)

    def test_missing_run(self):
        with pytest.raises(ValidationError):
            parse_scenario("agent a\n")

    def test_duplicate_run(self):
        with pytest.raises(ValidationError):
            parse_scenario("agent a\nrun delta\nrun delta\n")

    def test_reserved_agent_name(self):
        with pytest.raises(ValidationError):
            parse_scenario("agent pi\nrun delta\n")

    def test_subordination_cycle(self):
        text = "agent a b\nsubord a <= b\nsubord b <= a\nrun delta\n"
        with pytest.raises(ValidationError):
            parse_scenario(text)

    def test_delegated_withdrawal_is_rejected(self):
        with pytest.raises(ValidationError):
            parse_scenario("agent a b\ntype t\ntask x : t\nrun pw(a[b], x, a)\n")


class TestTermSyntax:
    def test_precedence(self, plain_model):
        term = parse_term("pi(a, x, b) . pw(a, x, b) + delta || ok", plain_model)
        a, b = plain_model.agent("a"), plain_model.agent("b")
        x = plain_model.body("x")
        seq = Seq(Act(IntroduceEvent(a, x, b)), Act(WithdrawEvent(a, x, b)))
        assert isinstance(term, Par)
        assert term.left == Alt(seq, DEADLOCK)

    def test_parentheses_override(self, plain_model):
        term = parse_term("pi(a, x, b) . (pw(a, x, b) + delta)", plain_model)
        assert isinstance(term, Seq)
        assert isinstance(term.right, Alt)

    def test_guard_binds_one_operand(self, plain_model):
        term = parse_term("[true] -> pi(a, x, b) . delta", plain_model)
        assert isinstance(term, Seq)
        assert isinstance(term.left, Guard)

    def test_guard_over_sequence_needs_parens(self, plain_model):
        term = parse_term("[true] -> (pi(a, x, b) . delta)", plain_model)
        assert isinstance(term, Guard)
        assert isinstance(term.body, Seq)

    def test_operators_associate_left(self, plain_model):
        term = parse_term("delta + delta + ok", plain_model)
        assert term == Alt(Alt(DEADLOCK, DEADLOCK), DONE)

    def test_implication_associates_right(self, plain_model):
        term = parse_term("[true => false => true] -> delta", plain_model)
        cond = term.condition
        assert cond == Implies(TRUE, Implies(FALSE, TRUE))

    def test_forall_shadows_agent_name(self, plain_model):
        # the bound variable wins over the like-named agent inside the body
        term = parse_term("[forall c != a : p(b, x, c)] -> delta", plain_model)
        cond = term.condition
        assert cond == ForAllAgents(
            "c",
            plain_model.agent("a"),
            HasPromise(plain_model.agent("b"), plain_model.body("x"), AgentVar("c")),
        )

    def test_delegated_event_round_trip(self, plain_model):
        term = parse_term("pi(a[b], x, c[a])", plain_model)
        event = term.event
        assert isinstance(event, GeneralizedIntroduceEvent)
        assert parse_term(str(term), plain_model) == term

    def test_one_sided_brackets_default_to_the_announcer(self, plain_model):
        term = parse_term("pi(a[b], x, c)", plain_model)
        event = term.event
        assert event.performer == plain_model.agent("b")
        assert event.beneficiary == plain_model.agent("c")

    def test_protocol_sugar(self, ride_model):
        term = parse_term("protocol(ja, ma, tbc2JUB)", ride_model)
        assert term == make_protocol(
            ride_model, ride_model.agent("ja"), ride_model.agent("ma"), ride_model.body("tbc2JUB")
        )

    def test_protocol_rejects_usage_bodies(self, ride_model):
        with pytest.raises(ValidationError):
            parse_term("protocol(ja, ma, ~tbc2JUB)", ride_model)

    def test_term_error_position(self, plain_model):
        with pytest.raises(ParseError) as exc:
            parse_term("pi(a, x, b) . ", plain_model)
        assert exc.value.line == 1
        assert exc.value.column >= len("pi(a, x, b) . ")


class TestRendering:
    def test_body(self, ride_model):
        assert render(ride_model.body("!~tbc2JUB")) == "!~tbc2JUB"

    def test_state_is_sorted(self, ride_model):
        state = State(
            frozenset(
                {
                    ride_model.promise("ma", "~tbc2JUB", "ja"),
                    ride_model.promise("ja", "tbc2JUB", "ma"),
                }
            )
        )
        assert render(state) == "{ja:tbc2JUB->ma, ma:~tbc2JUB->ja}"

    def test_trace_renders_one_event_per_line(self, ride_events):
        trace = Trace(ride_events, Outcome.SUCCESSFUL)
        assert render(trace) == (
            "pi(ja, tbc2JUB, ma)\n"
            "pi(ma, ~tbc2JUB, ja)\n"
            "pi(ju, tbc2JUB, ma)\n"
            "pi(ma, !~tbc2JUB, ju)\n"
            "pw(ju, tbc2JUB, ma)\n"
            "pw(ma, !~tbc2JUB, ju)"
        )

    @pytest.mark.parametrize("name", ["jub.promise", "isp.promise", "laws.promise"])
    def test_corpus_round_trip(self, name):
        first = parse_scenario(corpus_text(name))
        assert parse_scenario(render(first)) == first

    @pytest.mark.parametrize("seed", range(6))
    def test_generated_round_trip(self, seed):
        first = parse_scenario(random_scenario_text(seed))
        assert parse_scenario(render(first)) == first

    def test_term_round_trip_covers_precedence(self, plain_model):
        texts = [
            "pi(a, x, b) . pw(a, x, b) + delta || ok",
            "(pi(a, x, b) + delta) . pw(a, x, b)",
            "[E(~x) => forall v != a : not p(a, x, v)] -> pi(b, y, a)",
            "[not (true and false) or p(a, !~y, b)] -> (delta . ok)",
            "pi(a[b], x, c[a]) || pw(c, !y, a)",
        ]
        for text in texts:
            term = parse_term(text, plain_model)
            assert parse_term(str(term), plain_model) == term


class TestTraceFiles:
    def test_bundled_trace(self, ride, ride_events):
        assert len(ride_events) == 6
        assert str(ride_events[0]) == "pi(ja, tbc2JUB, ma)"
        assert str(ride_events[3]) == "pi(ma, !~tbc2JUB, ju)"

    def test_comments_and_blanks_ignored(self, ride_model):
        events = parse_trace("# intro\n\npi(ja, tbc2JUB, ma)  # offer\n", ride_model)
        assert len(events) == 1

    def test_bad_event_position(self, ride_model):
        with pytest.raises(ParseError) as exc:
            parse_trace("pi(ja, tbc2JUB, ma)\npx(ja, tbc2JUB, ma)\n", ride_model)
        assert exc.value.line == 2
