#include "ctsev/prediction.hpp"

#include <cmath>
#include <numeric>

#include "ctsev/canonical_json.hpp"
#include "ctsev/errors.hpp"

namespace ctsev {

std::string_view to_string(Task t) { return t == Task::Presence ? "presence" : "severity"; }

Task task_from_string(std::string_view name) {
    if (name == "presence") return Task::Presence;
    if (name == "severity") return Task::Severity;
    throw InvalidArgument("unknown task '" + std::string(name) + "' (expected presence or severity)");
}

const std::vector<std::string>& class_names(Task t) {
    static const std::vector<std::string> presence{"Negative", "Positive", "Severe"};
    static const std::vector<std::string> severity{"non-severe", "severe"};
    return t == Task::Presence ? presence : severity;
}

int class_index(Task t, std::string_view name) {
    const auto& names = class_names(t);
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    throw InvalidArgument("class '" + std::string(name) + "' not part of the " + std::string(to_string(t)) + " task");
}

void validate(const Prediction& p) {
    if (p.probs.empty() || p.probs.size() != p.classes.size())
        throw InvalidArgument("prediction has " + std::to_string(p.probs.size()) + " probabilities for " +
                              std::to_string(p.classes.size()) + " classes");
    double sum = 0.0;
    for (double v : p.probs) {
        if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("probability outside [0, 1]");
        sum += v;
    }
    if (std::abs(sum - 1.0) > kSimplexTolerance)
        throw InvalidArgument("probabilities sum to " + format_real(sum));
}

std::string render_predictions(const PredictionFile& preds) {
    const auto& classes = class_names(preds.task);
    Json items = Json::array();
    for (const auto& [id, probs] : preds.items) {
        try {
            validate(Prediction{classes, probs});
        } catch (const InvalidArgument& e) {
            throw InvalidArgument("prediction for '" + id + "': " + e.what());
        }
        Json p = Json::array();
        for (double v : probs) p.push_back(v);
        items.push_back(Json{{"id", id}, {"probs", std::move(p)}});
    }
    Json doc{{"task", std::string(to_string(preds.task))}, {"classes", classes}, {"items", std::move(items)}};
    return canonical_dump(doc);
}

void write_predictions(const PredictionFile& preds, const std::filesystem::path& path) {
    write_text_file(path, render_predictions(preds));
}

PredictionFile read_predictions(const std::filesystem::path& path) {
    const std::string where = path.string();
    Json doc = read_json_file(path);
    PredictionFile out;
    try {
        out.task = task_from_string(doc.at("task").get<std::string>());
        auto classes = doc.at("classes").get<std::vector<std::string>>();
        if (classes != class_names(out.task)) throw FormatError(where, 0, "class list does not match the task");
        for (const auto& item : doc.at("items")) {
            auto id = item.at("id").get<std::string>();
            auto probs = item.at("probs").get<std::vector<double>>();
            if (out.task == Task::Severity && probs.size() == 1) {
                if (!(probs[0] >= 0.0 && probs[0] <= 1.0))
                    throw FormatError(where, 0, "item '" + id + "': severity probability outside [0, 1]");
                probs = {1.0 - probs[0], probs[0]};
            }
            try {
                validate(Prediction{classes, probs});
            } catch (const InvalidArgument& e) {
                throw FormatError(where, 0, "item '" + id + "': " + e.what());
            }
            if (!out.items.emplace(id, std::move(probs)).second)
                throw FormatError(where, 0, "duplicate item id '" + id + "'");
        }
    } catch (const Json::exception& e) {
        throw FormatError(where, 0, std::string("unexpected JSON structure: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw FormatError(where, 0, e.what());
    }
    return out;
}

} // namespace ctsev
