#pragma once

// Dialogue-context taxonomy: dialogue acts, task parameters, the mapping
// from raw contexts to the ten LM classes, and the robustness fallback
// that routes weakly trained classes to the context-independent model.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ctxlm {

enum class DialogueAct : std::uint8_t { Request, Verify };

enum class TaskParameter : std::uint8_t {
    DepCity,
    ArrCity,
    DepTime,
    DepDate,
    WeekDay,      // semantic variant of DepDate
    RelativeDay,  // semantic variant of DepDate
    PartDay,      // semantic variant of DepTime
    Hour,         // semantic variant of DepTime
};

struct DialogueContext {
    DialogueAct act = DialogueAct::Request;
    std::vector<TaskParameter> params;  // ordered, non-empty

    bool operator==(const DialogueContext&) const = default;
};

enum class LMClassId : std::uint8_t {
    ReqDepCity,
    ReqDepArrCity,
    ReqArrCity,
    ReqTime,
    ReqDate,
    VerDepCity,
    VerDepArrCity,
    VerArrCity,
    VerTime,
    VerDate,
    ContextIndependent,
};

inline constexpr std::size_t kNumLMClasses = 11;
inline constexpr std::size_t kNumSpecificLMClasses = 10;

inline constexpr std::array<LMClassId, kNumLMClasses> all_lm_classes() {
    return {LMClassId::ReqDepCity,    LMClassId::ReqDepArrCity,
            LMClassId::ReqArrCity,    LMClassId::ReqTime,
            LMClassId::ReqDate,       LMClassId::VerDepCity,
            LMClassId::VerDepArrCity, LMClassId::VerArrCity,
            LMClassId::VerTime,       LMClassId::VerDate,
            LMClassId::ContextIndependent};
}

inline std::string_view to_string(DialogueAct act) {
    return act == DialogueAct::Request ? "DA-REQUEST" : "DA-VERIFY";
}

inline std::string_view to_string(TaskParameter p) {
    switch (p) {
        case TaskParameter::DepCity: return "dep-city";
        case TaskParameter::ArrCity: return "arr-city";
        case TaskParameter::DepTime: return "dep-time";
        case TaskParameter::DepDate: return "dep-date";
        case TaskParameter::WeekDay: return "week-day";
        case TaskParameter::RelativeDay: return "relative-day";
        case TaskParameter::PartDay: return "part-day";
        case TaskParameter::Hour: return "hour";
    }
    return "?";
}

inline std::optional<TaskParameter> parse_task_parameter(std::string_view s) {
    for (TaskParameter p : {TaskParameter::DepCity, TaskParameter::ArrCity,
                            TaskParameter::DepTime, TaskParameter::DepDate,
                            TaskParameter::WeekDay, TaskParameter::RelativeDay,
                            TaskParameter::PartDay, TaskParameter::Hour}) {
        if (to_string(p) == s) return p;
    }
    return std::nullopt;
}

inline std::optional<DialogueAct> parse_dialogue_act(std::string_view s) {
    if (s == "DA-REQUEST") return DialogueAct::Request;
    if (s == "DA-VERIFY") return DialogueAct::Verify;
    return std::nullopt;
}

// Class labels follow the report row strings; the fallback is labelled
// "context-independent".
inline std::string_view to_string(LMClassId id) {
    switch (id) {
        case LMClassId::ReqDepCity: return "DA-REQUEST dep-city";
        case LMClassId::ReqDepArrCity: return "DA-REQUEST dep-city, arr-city";
        case LMClassId::ReqArrCity: return "DA-REQUEST arr-city";
        case LMClassId::ReqTime: return "DA-REQUEST time";
        case LMClassId::ReqDate: return "DA-REQUEST date";
        case LMClassId::VerDepCity: return "DA-VERIFY dep-city";
        case LMClassId::VerDepArrCity: return "DA-VERIFY dep-city, arr-city";
        case LMClassId::VerArrCity: return "DA-VERIFY arr-city";
        case LMClassId::VerTime: return "DA-VERIFY time";
        case LMClassId::VerDate: return "DA-VERIFY date";
        case LMClassId::ContextIndependent: return "context-independent";
    }
    return "?";
}

inline std::optional<LMClassId> parse_lm_class(std::string_view s) {
    for (LMClassId id : all_lm_classes())
        if (to_string(id) == s) return id;
    return std::nullopt;
}

// Collapses semantic variants: week-day/relative-day carry the same
// concept as dep-date, part-day/hour the same concept as dep-time.
inline TaskParameter canonical_parameter(TaskParameter p) {
    switch (p) {
        case TaskParameter::WeekDay:
        case TaskParameter::RelativeDay:
            return TaskParameter::DepDate;
        case TaskParameter::PartDay:
        case TaskParameter::Hour:
            return TaskParameter::DepTime;
        default:
            return p;
    }
}

// Maps a raw dialogue context onto one of the ten LM classes, falling
// back to the context-independent class for combinations outside the
// inventory. Steps: canonicalize parameters (merging duplicates, order
// preserved), truncate verifications to their first two parameters, then
// match against the class list. The conjoint city pair matches in either
// order.
inline LMClassId classify_context(const DialogueContext& ctx) {
    std::vector<TaskParameter> canon;
    for (TaskParameter p : ctx.params) {
        TaskParameter c = canonical_parameter(p);
        bool seen = false;
        for (TaskParameter q : canon) seen = seen || (q == c);
        if (!seen) canon.push_back(c);
    }
    if (canon.empty()) return LMClassId::ContextIndependent;

    if (ctx.act == DialogueAct::Verify && canon.size() > 2) canon.resize(2);

    const bool req = ctx.act == DialogueAct::Request;
    if (canon.size() == 1) {
        switch (canon[0]) {
            case TaskParameter::DepCity:
                return req ? LMClassId::ReqDepCity : LMClassId::VerDepCity;
            case TaskParameter::ArrCity:
                return req ? LMClassId::ReqArrCity : LMClassId::VerArrCity;
            case TaskParameter::DepTime:
                return req ? LMClassId::ReqTime : LMClassId::VerTime;
            case TaskParameter::DepDate:
                return req ? LMClassId::ReqDate : LMClassId::VerDate;
            default:
                return LMClassId::ContextIndependent;
        }
    }
    if (canon.size() == 2) {
        const bool city_pair =
            (canon[0] == TaskParameter::DepCity && canon[1] == TaskParameter::ArrCity) ||
            (canon[0] == TaskParameter::ArrCity && canon[1] == TaskParameter::DepCity);
        if (city_pair)
            return req ? LMClassId::ReqDepArrCity : LMClassId::VerDepArrCity;
    }
    return LMClassId::ContextIndependent;
}

struct LMClassStats {
    std::uint64_t utterances = 0;
    std::uint64_t multiword_utterances = 0;  // utterances longer than one token
};

struct RobustnessPolicy {
    std::uint64_t min_utterances = 500;
    std::uint64_t min_multiword_utterances = 200;
};

// Substitutes a weakly trained specific class with the context-independent
// model: a class whose training set is too small, or too dominated by
// single-word answers, is not robust enough to use on its own.
inline LMClassId effective_lm(LMClassId cls,
                              const std::array<LMClassStats, kNumSpecificLMClasses>& stats,
                              const RobustnessPolicy& policy = {}) {
    if (cls == LMClassId::ContextIndependent) return cls;
    auto idx = static_cast<std::size_t>(cls);
    if (idx >= kNumSpecificLMClasses) throw std::invalid_argument("unknown LM class");
    const LMClassStats& s = stats[idx];
    if (s.utterances < policy.min_utterances) return LMClassId::ContextIndependent;
    if (s.multiword_utterances < policy.min_multiword_utterances)
        return LMClassId::ContextIndependent;
    return cls;
}

}  // namespace ctxlm
