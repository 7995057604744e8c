#include "ctsev/cohort.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "ctsev/canonical_json.hpp"
#include "ctsev/errors.hpp"

namespace ctsev {

std::vector<std::string> split_csv_line(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

namespace {

struct CsvTable {
    std::vector<std::vector<std::string>> rows; // data rows only
    std::vector<std::size_t> row_numbers;
};

CsvTable read_table(const std::filesystem::path& path, const std::vector<std::string>& header) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    const std::string where = path.string();
    std::string line;
    std::size_t row = 0;
    CsvTable table;
    bool seen_header = false;
    while (std::getline(f, line)) {
        ++row;
        if (row == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
        auto cells = split_csv_line(line);
        if (cells.size() == 1 && cells[0].empty()) continue;
        if (!seen_header) {
            if (cells != header) {
                std::string expected;
                for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
                throw ParseError(where, row, "header must be exactly '" + expected + "'");
            }
            seen_header = true;
            continue;
        }
        if (cells.size() != header.size())
            throw ParseError(where, row,
                             "expected " + std::to_string(header.size()) + " columns, got " +
                                 std::to_string(cells.size()));
        table.rows.push_back(std::move(cells));
        table.row_numbers.push_back(row);
    }
    if (!seen_header) throw ParseError(where, 1, "missing header");
    return table;
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
    if (s.empty()) return false;
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

} // namespace

std::vector<PatientRecord> read_cohort_csv(const std::filesystem::path& path) {
    auto table = read_table(path, {"patient_id", "age", "sex"});
    const std::string where = path.string();
    std::vector<PatientRecord> out;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& cells = table.rows[i];
        std::size_t row = table.row_numbers[i];
        PatientRecord rec;
        rec.patient_id = cells[0];
        if (rec.patient_id.empty()) throw ParseError(where, row, "empty patient_id");
        if (!seen.insert(rec.patient_id).second)
            throw ParseError(where, row, "duplicate patient_id '" + rec.patient_id + "'");
        if (!parse_number(cells[1], rec.age_years)) throw ParseError(where, row, "unparsable age '" + cells[1] + "'");
        if (rec.age_years < 0 || rec.age_years > 120)
            throw ParseError(where, row, "age " + cells[1] + " outside [0, 120]");
        if (cells[2] == "F")
            rec.sex = Sex::Female;
        else if (cells[2] == "M")
            rec.sex = Sex::Male;
        else
            throw ParseError(where, row, "unknown sex code '" + cells[2] + "' (expected F or M)");
        out.push_back(std::move(rec));
    }
    return out;
}

void write_cohort_csv(const std::vector<PatientRecord>& records, const std::filesystem::path& path) {
    std::string text = "patient_id,age,sex\n";
    for (const auto& r : records)
        text += r.patient_id + "," + std::to_string(r.age_years) + "," + (r.sex == Sex::Male ? "M" : "F") + "\n";
    write_text_file(path, text);
}

std::map<std::string, std::string> read_labels_csv(const std::filesystem::path& path) {
    auto table = read_table(path, {"patient_id", "label"});
    const std::string where = path.string();
    std::map<std::string, std::string> out;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& cells = table.rows[i];
        std::size_t row = table.row_numbers[i];
        if (cells[0].empty()) throw ParseError(where, row, "empty patient_id");
        if (cells[1] != "Negative" && cells[1] != "Positive" && cells[1] != "Severe")
            throw ParseError(where, row, "unknown label '" + cells[1] + "'");
        if (!out.emplace(cells[0], cells[1]).second)
            throw ParseError(where, row, "duplicate patient_id '" + cells[0] + "'");
    }
    return out;
}

void write_labels_csv(const std::map<std::string, std::string>& labels, const std::filesystem::path& path) {
    std::string text = "patient_id,label\n";
    for (const auto& [id, label] : labels) text += id + "," + label + "\n";
    write_text_file(path, text);
}

std::map<std::string, double> read_ilr_csv(const std::filesystem::path& path) {
    auto table = read_table(path, {"patient_id", "ilr"});
    const std::string where = path.string();
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& cells = table.rows[i];
        std::size_t row = table.row_numbers[i];
        double v = 0.0;
        if (!parse_number(cells[1], v)) throw ParseError(where, row, "unparsable ilr '" + cells[1] + "'");
        if (!(v >= 0.0 && v <= 1.0)) throw ParseError(where, row, "ilr outside [0, 1]");
        if (!out.emplace(cells[0], v).second) throw ParseError(where, row, "duplicate patient_id '" + cells[0] + "'");
    }
    return out;
}

void write_ilr_csv(const std::map<std::string, double>& ilr, const std::filesystem::path& path) {
    std::string text = "patient_id,ilr\n";
    for (const auto& [id, v] : ilr) text += id + "," + format_real(v) + "\n";
    write_text_file(path, text);
}

} // namespace ctsev
