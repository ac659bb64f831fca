#pragma once

// Fixed-mixed-initiative dialogue manager for the railway timetable
// task: next-act policy, coherent frame integration (including the
// rejection of spurious negations), timetable answers, and the
// end-to-end session loop that drives registry switching.

#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctxlm/contextmap.hpp"
#include "ctxlm/registry.hpp"
#include "ctxlm/semantics.hpp"

namespace ctxlm {

enum class Phase : std::uint8_t { Collecting, Confirming, Answering, Closed };

struct TimetableRow {
    std::string train_id;
    std::string dep_city;
    std::string arr_city;
    int dep_minutes = 0;  // minutes since midnight
    int arr_minutes = 0;
};

struct Timetable {
    std::vector<TimetableRow> rows;
};

inline std::string minutes_to_hhmm(int minutes) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d:%02d", minutes / 60, minutes % 60);
    return buf;
}

inline int hhmm_to_minutes(const std::string& s) {
    std::size_t colon = s.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("bad time: " + s);
    int h = std::stoi(s.substr(0, colon));
    int m = std::stoi(s.substr(colon + 1));
    if (h < 0 || h > 23 || m < 0 || m > 59) throw std::invalid_argument("bad time: " + s);
    return h * 60 + m;
}

// Timetable file: train_id<TAB>dep<TAB>arr<TAB>dep_time<TAB>arr_time
inline Timetable load_timetable(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    Timetable tt;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        TimetableRow row;
        std::string dep_t, arr_t;
        if (!(ls >> row.train_id >> row.dep_city >> row.arr_city >> dep_t >> arr_t))
            throw std::runtime_error("timetable: expected 5 columns: " + line);
        row.dep_minutes = hhmm_to_minutes(dep_t);
        row.arr_minutes = hhmm_to_minutes(arr_t);
        tt.rows.push_back(std::move(row));
    }
    return tt;
}

inline void save_timetable(const Timetable& tt, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (const auto& r : tt.rows)
        out << r.train_id << '\t' << r.dep_city << '\t' << r.arr_city << '\t'
            << minutes_to_hhmm(r.dep_minutes) << '\t' << minutes_to_hhmm(r.arr_minutes) << '\n';
}

// Toy timetable with a dense evening Milano-Roma service (train 243 at
// 20:20 mirrors the canonical session) plus a few sparse connections.
inline Timetable default_timetable() {
    Timetable tt;
    auto add = [&](const char* id, const char* dep, const char* arr, const char* dt,
                   const char* at) {
        tt.rows.push_back({id, dep, arr, hhmm_to_minutes(dt), hhmm_to_minutes(at)});
    };
    add("101", "milano", "roma", "07:15", "11:40");
    add("115", "milano", "roma", "08:20", "12:45");
    add("133", "milano", "roma", "13:05", "17:30");
    add("201", "milano", "roma", "18:05", "23:40");
    add("227", "milano", "roma", "19:10", "23:55");
    add("243", "milano", "roma", "20:20", "23:59");
    add("251", "milano", "roma", "21:30", "23:59");
    add("269", "milano", "roma", "22:45", "23:59");
    add("310", "torino", "roma", "09:00", "14:20");
    add("315", "torino", "genova", "10:30", "12:15");
    add("402", "milano", "napoli", "10:00", "16:30");
    add("407", "milano", "napoli", "19:40", "23:59");
    add("501", "roma", "milano", "08:10", "12:35");
    add("505", "roma", "milano", "18:30", "22:55");
    return tt;
}

struct DialogueState {
    CaseFrame slots;
    bool dep_city_confirmed = false;
    bool arr_city_confirmed = false;
    bool dep_date_confirmed = false;
    bool part_day_confirmed = false;
    std::optional<DialogueContext> pending;  // context of the last system act
    std::vector<std::pair<std::string, std::string>> history;  // (system act, user frame)
    Phase phase = Phase::Collecting;
    int reprompts = 0;
};

struct SessionConfig {
    int many_trains_threshold = 3;  // above this, ask for a departure time
    int max_reprompts = 3;
    int max_turns = 20;
};

struct NextAct {
    bool is_answer = false;
    DialogueContext ctx;  // valid when !is_answer
    std::string prompt;
};

namespace detail {

inline int concrete_hour_minutes(const CaseFrame& slots) {
    int h = slots.hour.value_or(0);
    if (slots.part_day) {
        switch (*slots.part_day) {
            case PartDay::Evening:
                if (h < 12) h += 12;
                if (h < 18) h = 18;
                break;
            case PartDay::Afternoon:
                if (h < 7) h += 12;
                break;
            case PartDay::Morning:
                break;
        }
    }
    return h * 60;
}

inline bool in_part_day(int minutes, PartDay pd) {
    switch (pd) {
        case PartDay::Morning: return minutes < 12 * 60;
        case PartDay::Afternoon: return minutes >= 12 * 60 && minutes < 18 * 60;
        case PartDay::Evening: return minutes >= 18 * 60;
    }
    return true;
}

inline std::vector<const TimetableRow*> matching_rows(const DialogueState& st,
                                                      const Timetable& tt) {
    std::vector<const TimetableRow*> out;
    for (const auto& r : tt.rows) {
        if (st.slots.dep_city && r.dep_city != *st.slots.dep_city) continue;
        if (st.slots.arr_city && r.arr_city != *st.slots.arr_city) continue;
        if (st.slots.part_day && !in_part_day(r.dep_minutes, *st.slots.part_day)) continue;
        out.push_back(&r);
    }
    return out;
}

}  // namespace detail

inline NextAct next_act(const DialogueState& st, const Timetable& tt,
                        const SessionConfig& cfg = {}) {
    if (st.phase == Phase::Closed) throw std::logic_error("next_act: session is closed");

    // Verify newly filled, unconfirmed slots, batched in canonical order.
    std::vector<TaskParameter> unconfirmed;
    if (st.slots.dep_city && !st.dep_city_confirmed) unconfirmed.push_back(TaskParameter::DepCity);
    if (st.slots.arr_city && !st.arr_city_confirmed) unconfirmed.push_back(TaskParameter::ArrCity);
    if (st.slots.dep_date && !st.dep_date_confirmed) unconfirmed.push_back(TaskParameter::DepDate);
    if (st.slots.part_day && !st.part_day_confirmed) unconfirmed.push_back(TaskParameter::PartDay);
    if (!unconfirmed.empty()) {
        std::string prompt = "do you want to go";
        if (st.slots.dep_city) prompt += " from " + *st.slots.dep_city;
        if (st.slots.arr_city) prompt += " to " + *st.slots.arr_city;
        if (st.slots.part_day)
            prompt += " leaving in the " + lowercase(to_string(*st.slots.part_day));
        if (st.slots.dep_date) prompt += " on " + *st.slots.dep_date;
        prompt += "?";
        return {false, {DialogueAct::Verify, unconfirmed}, prompt};
    }

    if (!st.slots.dep_city && !st.slots.arr_city)
        return {false,
                {DialogueAct::Request, {TaskParameter::DepCity, TaskParameter::ArrCity}},
                "please state your departure and your destination."};
    if (!st.slots.dep_city)
        return {false, {DialogueAct::Request, {TaskParameter::DepCity}},
                "where do you leave from?"};
    if (!st.slots.arr_city)
        return {false, {DialogueAct::Request, {TaskParameter::ArrCity}},
                "where do you want to go?"};

    // A day-period or hour already narrows the day; otherwise ask for the
    // date before consulting the timetable.
    if (!st.slots.dep_date && !st.slots.part_day && !st.slots.hour)
        return {false, {DialogueAct::Request, {TaskParameter::DepDate}},
                "which day do you want to leave?"};

    auto matches = detail::matching_rows(st, tt);
    if (static_cast<int>(matches.size()) > cfg.many_trains_threshold && !st.slots.hour) {
        std::string prompt = "there are many trains";
        if (st.slots.part_day) prompt += " in the " + lowercase(to_string(*st.slots.part_day));
        prompt += ". which hour do you want to leave?";
        return {false, {DialogueAct::Request, {TaskParameter::DepTime}}, prompt};
    }
    return {true, {}, {}};
}

struct IntegrateResult {
    bool discarded_negation = false;
    bool verification_failed = false;
};

// Coherence-filtered slot update. A negation with nothing pending to
// deny is discarded; a confirmation marks the pending verification's
// parameters confirmed; extra slot values are accepted (mixed
// initiative); a new value for a confirmed slot re-opens it.
inline IntegrateResult integrate(DialogueState& st, const CaseFrame& frame) {
    if (st.phase != Phase::Collecting && st.phase != Phase::Confirming)
        throw std::logic_error("integrate: session not accepting input");
    IntegrateResult res;

    const bool pending_verify = st.pending && st.pending->act == DialogueAct::Verify;
    const CaseFrame before = st.slots;

    auto update_slot = [&](auto& slot, const auto& value, bool& confirmed) {
        if (!value) return;
        if (slot && *slot == *value) return;
        slot = value;       // fill or correct
        confirmed = false;  // corrections re-open verification
    };
    update_slot(st.slots.dep_city, frame.dep_city, st.dep_city_confirmed);
    update_slot(st.slots.arr_city, frame.arr_city, st.arr_city_confirmed);
    update_slot(st.slots.dep_date, frame.dep_date, st.dep_date_confirmed);
    update_slot(st.slots.part_day, frame.part_day, st.part_day_confirmed);
    if (frame.hour) st.slots.hour = frame.hour;

    if (frame.confirm == Confirm::No) {
        if (!pending_verify) {
            res.discarded_negation = true;  // nothing to be denied
        } else {
            res.verification_failed = true;
            // Without a replacement value the denied slot must be asked
            // again: clear the first pending parameter the frame did not
            // correct.
            bool corrected = frame.dep_city || frame.arr_city || frame.dep_date ||
                             frame.part_day || frame.hour;
            if (!corrected) {
                for (TaskParameter p : st.pending->params) {
                    switch (canonical_parameter(p)) {
                        case TaskParameter::DepCity:
                            st.slots.dep_city.reset();
                            st.dep_city_confirmed = false;
                            break;
                        case TaskParameter::ArrCity:
                            st.slots.arr_city.reset();
                            st.arr_city_confirmed = false;
                            break;
                        case TaskParameter::DepDate:
                            st.slots.dep_date.reset();
                            st.dep_date_confirmed = false;
                            break;
                        case TaskParameter::DepTime:
                            st.slots.part_day.reset();
                            st.part_day_confirmed = false;
                            st.slots.hour.reset();
                            break;
                        default:
                            break;
                    }
                    break;  // only the first parameter is re-requested
                }
            }
        }
    } else if (frame.confirm == Confirm::Yes && pending_verify) {
        // A restated value that differs from what was on the table is a
        // correction and keeps that slot open for re-verification.
        for (TaskParameter p : st.pending->params) {
            switch (canonical_parameter(p)) {
                case TaskParameter::DepCity:
                    if (!frame.dep_city || before.dep_city == frame.dep_city)
                        st.dep_city_confirmed = true;
                    break;
                case TaskParameter::ArrCity:
                    if (!frame.arr_city || before.arr_city == frame.arr_city)
                        st.arr_city_confirmed = true;
                    break;
                case TaskParameter::DepDate:
                    if (!frame.dep_date || before.dep_date == frame.dep_date)
                        st.dep_date_confirmed = true;
                    break;
                case TaskParameter::DepTime:
                    if (!frame.part_day || before.part_day == frame.part_day)
                        st.part_day_confirmed = true;
                    break;
                default:
                    break;
            }
        }
        st.phase = Phase::Collecting;
    }
    return res;
}

struct AnswerResult {
    std::string text;
    bool answered = false;  // false: apology, time constraint relaxed
};

inline AnswerResult answer(DialogueState& st, const Timetable& tt) {
    auto matches = detail::matching_rows(st, tt);
    const TimetableRow* pick = nullptr;
    if (st.slots.hour) {
        const int requested = detail::concrete_hour_minutes(st.slots);
        for (const auto* r : matches)
            if (r->dep_minutes >= requested && (!pick || r->dep_minutes < pick->dep_minutes))
                pick = r;
    } else {
        for (const auto* r : matches)
            if (!pick || r->dep_minutes < pick->dep_minutes) pick = r;
    }
    if (!pick) {
        st.slots.hour.reset();  // relax the time constraint and keep collecting
        st.phase = Phase::Collecting;
        return {"sorry, there is no matching train. could you choose another time?", false};
    }
    st.phase = Phase::Answering;
    std::string text = "train " + pick->train_id + " leaves from " + pick->dep_city + " at " +
                       minutes_to_hhmm(pick->dep_minutes) + "; it arrives at " + pick->arr_city +
                       " at " + minutes_to_hhmm(pick->arr_minutes) +
                       ". do you need additional information about this train?";
    return {std::move(text), true};
}

struct TranscriptTurn {
    int index = 0;
    char speaker = 'S';
    std::string act_or_frame;  // system: act string or ANSWER; user: frame text
    std::string active_lm;
    std::string text;
};

struct Transcript {
    std::vector<TranscriptTurn> turns;
    std::vector<std::string> system_acts;  // e.g. "DA-REQUEST dep-city,arr-city", "ANSWER"
    Phase final_phase = Phase::Closed;

    std::string to_text() const {
        std::ostringstream out;
        for (const auto& t : turns)
            out << t.index << '\t' << t.speaker << '\t' << t.act_or_frame << '\t' << t.active_lm
                << '\t' << t.text << '\n';
        return out.str();
    }
};

inline std::string context_to_string(const DialogueContext& ctx) {
    std::string s(to_string(ctx.act));
    s.push_back('=');
    for (std::size_t i = 0; i < ctx.params.size(); ++i) {
        if (i) s.push_back(',');
        s += to_string(ctx.params[i]);
    }
    return s;
}

// A user turn: raw text (parsed with the lexicon) or a pre-parsed frame.
struct UserTurn {
    std::optional<std::string> text;
    std::optional<CaseFrame> frame;
};
using UserTurnFn = std::function<std::optional<UserTurn>(const std::string& prompt)>;

// End-to-end loop: next_act -> registry switch -> user turn -> parse ->
// integrate. The registry is switched before every user turn so the act
// just produced selects the LM active during the reply.
inline Transcript run_session(LMRegistry& registry, const Timetable& tt,
                              const SemanticLexicon& lex, const UserTurnFn& user,
                              const SessionConfig& cfg = {}) {
    if (!registry.loaded()) throw std::logic_error("run_session: registry not loaded");
    DialogueState st;
    Transcript tr;
    int turn = 0;
    while (turn < cfg.max_turns && st.phase != Phase::Closed) {
        NextAct na = next_act(st, tt, cfg);
        if (na.is_answer) {
            AnswerResult ar = answer(st, tt);
            tr.turns.push_back({turn++, 'S', "ANSWER", std::string(to_string(registry.active())),
                                ar.text});
            tr.system_acts.push_back("ANSWER");
            if (ar.answered) {
                // The additional-information offer closes the session.
                st.phase = Phase::Closed;
                break;
            }
            continue;
        }

        LMClassId active = registry.switch_to(na.ctx);
        st.pending = na.ctx;
        if (na.ctx.act == DialogueAct::Verify) st.phase = Phase::Confirming;
        tr.turns.push_back({turn++, 'S', context_to_string(na.ctx),
                            std::string(to_string(active)), na.prompt});
        tr.system_acts.push_back(context_to_string(na.ctx));

        auto input = user(na.prompt);
        if (!input || (input->text && input->text->empty() && !input->frame)) {
            if (++st.reprompts > cfg.max_reprompts) {
                st.phase = Phase::Closed;
                break;
            }
            continue;
        }
        st.reprompts = 0;
        CaseFrame frame =
            input->frame ? *input->frame : parse_frame(tokenize(*input->text, lex.multiword_station_phrases()), lex);
        tr.turns.push_back({turn++, 'U', frame_to_string(frame),
                            std::string(to_string(active)),
                            input->text ? *input->text : frame_to_string(frame)});
        integrate(st, frame);
        st.history.push_back({context_to_string(na.ctx), frame_to_string(frame)});
    }
    tr.final_phase = st.phase;
    return tr;
}

// Scripted replay over pre-parsed user frames.
inline Transcript run_session_frames(LMRegistry& registry, const Timetable& tt,
                                     const SemanticLexicon& lex,
                                     const std::vector<CaseFrame>& frames,
                                     const SessionConfig& cfg = {}) {
    std::size_t next = 0;
    return run_session(
        registry, tt, lex,
        [&](const std::string&) -> std::optional<UserTurn> {
            if (next >= frames.size()) return std::nullopt;
            UserTurn t;
            t.frame = frames[next++];
            return t;
        },
        cfg);
}

}  // namespace ctxlm
