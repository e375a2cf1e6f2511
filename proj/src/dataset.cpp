#include "dimx/dataset.hpp"
#include "dimx/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace dimx {

FeatureStats compute_stats(std::span<const double> column) {
    if (column.size() < 2) throw PreconditionError("compute_stats: need at least two values");
    FeatureStats s;
    s.min = column[0];
    s.max = column[0];
    double sum = 0.0;
    for (double v : column) {
        if (!std::isfinite(v)) throw PreconditionError("compute_stats: non-finite value");
        sum += v;
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
    }
    const double n = static_cast<double>(column.size());
    s.mean = sum / n;
    // A constant column must report exactly mean == min and std == 0.
    if (s.min == s.max) {
        s.mean = s.min;
        s.std = 0.0;
        return s;
    }
    s.mean = std::clamp(s.mean, s.min, s.max);
    double ss = 0.0;
    for (double v : column) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / n);
    return s;
}

FeatureStats compute_stats(const Eigen::Ref<const Vector>& column) {
    Vector copy = column;
    return compute_stats(std::span<const double>(copy.data(), static_cast<std::size_t>(copy.size())));
}

Dataset::Dataset(std::vector<std::string> ids, std::vector<std::string> feature_names, Matrix values)
    : ids_(std::move(ids)), feature_names_(std::move(feature_names)), values_(std::move(values)) {
    if (values_.rows() < 2) throw PreconditionError("dataset needs at least two rows");
    if (values_.cols() < 1) throw PreconditionError("dataset needs at least one feature");
    if (ids_.size() != rows()) throw PreconditionError("id count does not match row count");
    if (feature_names_.size() != cols()) throw PreconditionError("feature name count does not match column count");
    if (!values_.allFinite()) throw PreconditionError("dataset contains non-finite values");

    std::unordered_set<std::string> seen;
    for (const auto& id : ids_)
        if (!seen.insert(id).second) throw PreconditionError("duplicate id '" + id + "'");

    stats_.reserve(cols());
    for (Eigen::Index j = 0; j < values_.cols(); ++j) stats_.push_back(compute_stats(values_.col(j)));
}

std::optional<std::size_t> Dataset::index_of(std::string_view id) const {
    auto it = std::find(ids_.begin(), ids_.end(), id);
    if (it == ids_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - ids_.begin());
}

std::optional<std::size_t> Dataset::feature_index(std::string_view name) const {
    auto it = std::find(feature_names_.begin(), feature_names_.end(), name);
    if (it == feature_names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - feature_names_.begin());
}

Dataset Dataset::with_row(std::size_t i, const Vector& x) const {
    if (i >= rows() || static_cast<std::size_t>(x.size()) != cols())
        throw PreconditionError("with_row: index or dimension out of range");
    Matrix v = values_;
    v.row(static_cast<Eigen::Index>(i)) = x.transpose();
    return Dataset(ids_, feature_names_, std::move(v));
}

namespace {

// Splits CSV text into records of fields. Handles quoted fields with embedded
// separators, doubled quotes and CRLF line endings.
std::vector<std::vector<std::string>> split_records(std::istream& in) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    long line = 1;

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        // Skip blank lines.
        if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
        record.clear();
    };

    char ch;
    while (in.get(ch)) {
        if (in_quotes) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    in.get(ch);
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') ++line;
                field.push_back(ch);
            }
            continue;
        }
        switch (ch) {
        case '"':
            if (field_started && !field.empty())
                throw ParseError("unexpected quote inside unquoted field", line);
            in_quotes = true;
            field_started = true;
            break;
        case ',':
            end_field();
            break;
        case '\r':
            if (in.peek() == '\n') break;
            [[fallthrough]];
        case '\n':
            end_record();
            ++line;
            break;
        default:
            field.push_back(ch);
            field_started = true;
        }
    }
    if (in_quotes) throw ParseError("unterminated quoted field", line);
    if (field_started || !record.empty()) end_record();
    return records;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view text, double& out) {
    text = trim(text);
    if (text.empty()) return false;
    if (text.front() == '+') text.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

}  // namespace

Dataset load_csv(std::istream& in, const std::optional<std::string>& id_column) {
    auto records = split_records(in);
    if (records.empty()) throw ParseError("empty file");
    const auto& header = records.front();

    long id_pos = -1;
    if (id_column) {
        auto it = std::find(header.begin(), header.end(), *id_column);
        if (it == header.end()) throw ParseError("id column '" + *id_column + "' not found in header", 0);
        id_pos = static_cast<long>(it - header.begin());
    }

    std::vector<std::string> feature_names;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (static_cast<long>(c) != id_pos) feature_names.emplace_back(trim(header[c]));
    if (feature_names.empty()) throw ParseError("no feature columns", 0);

    const std::size_t n = records.size() - 1;
    if (n == 0) throw ParseError("no data rows");
    Matrix values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(feature_names.size()));
    std::vector<std::string> ids;
    ids.reserve(n);

    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        const long row = static_cast<long>(r);
        if (rec.size() != header.size())
            throw ParseError("ragged row " + std::to_string(r) + ": expected " + std::to_string(header.size()) +
                                 " cells, found " + std::to_string(rec.size()),
                             row);
        Eigen::Index j = 0;
        for (std::size_t c = 0; c < rec.size(); ++c) {
            if (static_cast<long>(c) == id_pos) {
                ids.emplace_back(trim(rec[c]));
                continue;
            }
            double v;
            if (!parse_double(rec[c], v))
                throw ParseError("non-numeric cell '" + rec[c] + "' at row " + std::to_string(r) + ", column '" +
                                     header[c] + "'",
                                 row, static_cast<long>(c));
            values(static_cast<Eigen::Index>(r - 1), j++) = v;
        }
        if (id_pos < 0) ids.push_back(std::to_string(r - 1));
    }

    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (!seen.insert(ids[i]).second)
            throw ParseError("duplicate id '" + ids[i] + "' at row " + std::to_string(i + 1), static_cast<long>(i + 1));
    if (n < 2) throw ParseError("need at least two data rows");

    return Dataset(std::move(ids), std::move(feature_names), std::move(values));
}

Dataset load_csv(std::string_view text, const std::optional<std::string>& id_column) {
    std::istringstream in{std::string(text)};
    return load_csv(in, id_column);
}

namespace {

std::string quote_if_needed(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

}  // namespace

std::string to_csv(const Dataset& data, std::string_view id_header) {
    std::string out = quote_if_needed(std::string(id_header));
    for (const auto& name : data.feature_names()) out += "," + quote_if_needed(name);
    out += "\n";
    char buf[32];
    for (std::size_t i = 0; i < data.rows(); ++i) {
        out += quote_if_needed(data.ids()[i]);
        for (std::size_t j = 0; j < data.cols(); ++j) {
            const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf,
                                                 data.values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            out.push_back(',');
            out.append(buf, ptr);
        }
        out += "\n";
    }
    return out;
}

}  // namespace dimx
