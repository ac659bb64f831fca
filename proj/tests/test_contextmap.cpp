#include "doctest.h"

#include "ctxlm/contextmap.hpp"

using namespace ctxlm;
using P = TaskParameter;
using A = DialogueAct;

TEST_CASE("classify_context reproduces the full class list") {
    struct Row {
        DialogueContext ctx;
        LMClassId expect;
    };
    const std::vector<Row> rows = {
        {{A::Request, {P::DepCity}}, LMClassId::ReqDepCity},
        {{A::Request, {P::DepCity, P::ArrCity}}, LMClassId::ReqDepArrCity},
        {{A::Request, {P::ArrCity}}, LMClassId::ReqArrCity},
        {{A::Request, {P::DepTime}}, LMClassId::ReqTime},
        {{A::Request, {P::DepDate}}, LMClassId::ReqDate},
        {{A::Verify, {P::DepCity}}, LMClassId::VerDepCity},
        {{A::Verify, {P::DepCity, P::ArrCity}}, LMClassId::VerDepArrCity},
        {{A::Verify, {P::ArrCity}}, LMClassId::VerArrCity},
        {{A::Verify, {P::DepTime}}, LMClassId::VerTime},
        {{A::Verify, {P::DepDate}}, LMClassId::VerDate},
    };
    for (const auto& r : rows) CHECK(classify_context(r.ctx) == r.expect);
}

TEST_CASE("semantic variants merge into their canonical parameter") {
    CHECK(classify_context({A::Request, {P::WeekDay}}) == LMClassId::ReqDate);
    CHECK(classify_context({A::Request, {P::RelativeDay}}) == LMClassId::ReqDate);
    CHECK(classify_context({A::Request, {P::PartDay}}) == LMClassId::ReqTime);
    CHECK(classify_context({A::Request, {P::Hour}}) == LMClassId::ReqTime);
    CHECK(classify_context({A::Verify, {P::WeekDay}}) == LMClassId::VerDate);
    CHECK(classify_context({A::Verify, {P::Hour}}) == LMClassId::VerTime);
}

TEST_CASE("verification contexts truncate to the first two canonical parameters") {
    // The three-parameter verification from the canonical session.
    CHECK(classify_context({A::Verify, {P::DepCity, P::ArrCity, P::PartDay}}) ==
          LMClassId::VerDepArrCity);
    CHECK(classify_context({A::Verify, {P::DepDate, P::DepCity, P::ArrCity}}) ==
          LMClassId::ContextIndependent);
}

TEST_CASE("conjoint city pair is order-invariant") {
    for (A act : {A::Request, A::Verify}) {
        CHECK(classify_context({act, {P::DepCity, P::ArrCity}}) ==
              classify_context({act, {P::ArrCity, P::DepCity}}));
    }
}

TEST_CASE("combinations outside the inventory fall back to context-independent") {
    CHECK(classify_context({A::Request, {P::DepCity, P::DepTime}}) ==
          LMClassId::ContextIndependent);
    CHECK(classify_context({A::Request, {P::DepDate, P::DepTime}}) ==
          LMClassId::ContextIndependent);
    CHECK(classify_context({A::Request, {}}) == LMClassId::ContextIndependent);
}

TEST_CASE("classification is total and lands in the 11-value set") {
    const std::vector<P> all = {P::DepCity, P::ArrCity, P::DepTime, P::DepDate,
                                P::WeekDay, P::RelativeDay, P::PartDay, P::Hour};
    for (A act : {A::Request, A::Verify})
        for (P a : all)
            for (P b : all) {
                LMClassId cls = classify_context({act, {a, b}});
                CHECK(static_cast<std::size_t>(cls) < kNumLMClasses);
                // Idempotence: re-classifying a canonical single-parameter
                // context of the resulting family is stable.
                CHECK(classify_context({act, {canonical_parameter(a),
                                              canonical_parameter(b)}}) == cls);
            }
}

TEST_CASE("class labels round-trip through their string form") {
    for (LMClassId id : all_lm_classes()) {
        auto parsed = parse_lm_class(to_string(id));
        REQUIRE(parsed.has_value());
        CHECK(*parsed == id);
    }
    CHECK(std::string(to_string(LMClassId::ReqDepArrCity)) == "DA-REQUEST dep-city, arr-city");
    CHECK(std::string(to_string(LMClassId::ContextIndependent)) == "context-independent");
}

TEST_CASE("effective_lm substitutes weakly trained classes") {
    std::array<LMClassStats, kNumSpecificLMClasses> stats{};
    // Field-trial-like statistics: the single-city verification class has
    // enough rows but is dominated by one-word yes/no answers.
    stats[static_cast<std::size_t>(LMClassId::VerDepCity)] = {506, 150};
    stats[static_cast<std::size_t>(LMClassId::ReqTime)] = {1291, 1000};
    stats[static_cast<std::size_t>(LMClassId::ReqDepCity)] = {375, 300};

    CHECK(effective_lm(LMClassId::VerDepCity, stats) == LMClassId::ContextIndependent);
    CHECK(effective_lm(LMClassId::ReqTime, stats) == LMClassId::ReqTime);
    // Below the utterance-count threshold regardless of multiword share.
    CHECK(effective_lm(LMClassId::ReqDepCity, stats) == LMClassId::ContextIndependent);
    // All-pass policy is the identity.
    RobustnessPolicy all_pass{0, 0};
    for (LMClassId cls : all_lm_classes())
        if (cls != LMClassId::ContextIndependent)
            CHECK(effective_lm(cls, stats, all_pass) == cls);
    CHECK(effective_lm(LMClassId::ContextIndependent, stats) == LMClassId::ContextIndependent);
}
