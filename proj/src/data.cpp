#include "stabsel/data.hpp"

#include "stabsel/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace stabsel {

namespace {

std::vector<std::string> default_names(Index p) {
    std::vector<std::string> names;
    names.reserve(p);
    for (Index k = 0; k < p; ++k) names.push_back("X" + std::to_string(k + 1));
    return names;
}

}  // namespace

Dataset::Dataset(Matrix x, std::optional<Vector> y, std::vector<std::string> names)
    : x_(std::move(x)), y_(std::move(y)), names_(std::move(names)) {
    if (x_.rows() < 2) throw DataError("dataset needs at least 2 observations, got " + std::to_string(x_.rows()));
    if (x_.cols() < 1) throw DataError("dataset needs at least 1 variable");
    for (Eigen::Index j = 0; j < x_.cols(); ++j)
        for (Eigen::Index i = 0; i < x_.rows(); ++i)
            if (!std::isfinite(x_(i, j)))
                throw DataError("non-finite entry at row " + std::to_string(i + 1) + ", column " +
                                std::to_string(j + 1));
    if (y_) {
        if (y_->size() != x_.rows())
            throw DataError("response length " + std::to_string(y_->size()) + " does not match n = " +
                            std::to_string(x_.rows()));
        for (Eigen::Index i = 0; i < y_->size(); ++i)
            if (!std::isfinite((*y_)(i)))
                throw DataError("non-finite response at row " + std::to_string(i + 1));
    }
    if (names_.empty()) names_ = default_names(p());
    if (names_.size() != p())
        throw DataError("expected " + std::to_string(p()) + " column names, got " + std::to_string(names_.size()));
    scale_ = Vector::Ones(x_.cols());
}

const Vector& Dataset::y() const {
    if (!y_) throw DataError("dataset has no response");
    return *y_;
}

Dataset Dataset::rows(std::span<const Index> idx) const {
    Matrix sub(static_cast<Eigen::Index>(idx.size()), x_.cols());
    std::optional<Vector> ysub;
    if (y_) ysub = Vector(static_cast<Eigen::Index>(idx.size()));
    for (Index r = 0; r < idx.size(); ++r) {
        if (idx[r] >= n()) throw DataError("row index " + std::to_string(idx[r]) + " out of range");
        sub.row(static_cast<Eigen::Index>(r)) = x_.row(static_cast<Eigen::Index>(idx[r]));
        if (ysub) (*ysub)(static_cast<Eigen::Index>(r)) = (*y_)(static_cast<Eigen::Index>(idx[r]));
    }
    Dataset out(std::move(sub), std::move(ysub), names_);
    out.scale_ = scale_;
    return out;
}

Dataset Dataset::with_response(Vector y) const {
    Dataset out(x_, std::move(y), names_);
    out.scale_ = scale_;
    return out;
}

Dataset Dataset::without_response() const {
    Dataset out(x_, std::nullopt, names_);
    out.scale_ = scale_;
    return out;
}

Dataset Dataset::with_scale(Vector scale) const {
    if (scale.size() != x_.cols()) throw DataError("scale vector has wrong length");
    Dataset out = *this;
    out.scale_ = std::move(scale);
    return out;
}

Dataset normalize_columns(const Dataset& data) {
    Matrix x = data.x();
    Vector scale(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double norm = x.col(j).norm();
        if (!(norm > 0.0)) throw DataError("column " + std::to_string(j + 1) + " (" + data.names()[j] + ") has zero norm");
        x.col(j) /= norm;
        scale(j) = data.scale()(j) * norm;
    }
    std::optional<Vector> y;
    if (data.has_response()) y = data.y();
    return Dataset(std::move(x), std::move(y), data.names()).with_scale(std::move(scale));
}

Dataset normalize_columns(const Matrix& raw) { return normalize_columns(Dataset(raw)); }

// ---------------------------------------------------------------------------
// CSV

namespace {

struct CsvRow {
    std::vector<std::string> cells;
    Index line = 0;
};

std::vector<CsvRow> split_csv(std::string_view text) {
    std::vector<CsvRow> rows;
    CsvRow row;
    std::string cell;
    bool quoted = false;
    bool any = false;
    Index line = 1;
    row.line = line;

    auto end_row = [&] {
        if (any || !cell.empty() || !row.cells.empty()) {
            row.cells.push_back(std::move(cell));
            rows.push_back(std::move(row));
        }
        row = CsvRow{};
        cell.clear();
        any = false;
    };

    for (Index i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cell.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                cell.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                quoted = true;
                any = true;
                break;
            case ',':
                row.cells.push_back(std::move(cell));
                cell.clear();
                any = true;
                break;
            case '\r':
                break;
            case '\n':
                end_row();
                row.line = ++line;
                break;
            default:
                cell.push_back(c);
                any = true;
        }
    }
    if (quoted) throw DataError("unterminated quoted field starting near line " + std::to_string(row.line));
    end_row();
    return rows;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

}  // namespace

Dataset parse_csv(std::string_view text, const CsvOptions& options) {
    auto rows = split_csv(text);
    if (rows.empty()) throw DataError("CSV is empty");

    std::vector<std::string> header;
    Index first = 0;
    const Index width = rows.front().cells.size();
    if (options.has_header) {
        for (auto& c : rows.front().cells) header.emplace_back(trim(c));
        first = 1;
    } else {
        header = default_names(width);
    }

    std::optional<Index> response;
    if (options.response_column) {
        auto it = std::find(header.begin(), header.end(), *options.response_column);
        if (it == header.end()) throw DataError("response column '" + *options.response_column + "' not found in header");
        response = static_cast<Index>(it - header.begin());
    }

    const Index n = rows.size() - first;
    if (width < (response ? 2u : 1u)) throw DataError("CSV has no predictor columns");
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(width - (response ? 1 : 0)));
    Vector y(response ? static_cast<Eigen::Index>(n) : 0);

    for (Index r = 0; r < n; ++r) {
        const CsvRow& row = rows[first + r];
        const std::string where = "row " + std::to_string(r + 1) + " (line " + std::to_string(row.line) + ")";
        if (row.cells.size() != width)
            throw DataError("ragged CSV: " + where + " has " + std::to_string(row.cells.size()) +
                            " fields, expected " + std::to_string(width));
        Index out = 0;
        for (Index c = 0; c < width; ++c) {
            const std::string_view cell = trim(row.cells[c]);
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size())
                throw DataError("non-numeric cell '" + std::string(cell) + "' at " + where + ", column " +
                                std::to_string(c + 1) + " (" + header[c] + ")");
            if (!std::isfinite(v))
                throw DataError("non-finite cell at " + where + ", column " + std::to_string(c + 1));
            if (response && c == *response)
                y(static_cast<Eigen::Index>(r)) = v;
            else
                x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(out++)) = v;
        }
    }

    std::vector<std::string> names;
    for (Index c = 0; c < width; ++c)
        if (!response || c != *response) names.push_back(header[c]);
    std::optional<Vector> yopt;
    if (response) yopt = std::move(y);
    return Dataset(std::move(x), std::move(yopt), std::move(names));
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_csv(buf.str(), options);
    } catch (const Error& e) {
        throw e.with_context(path.string());
    }
}

std::string to_csv(const Dataset& data) {
    std::ostringstream out;
    out.precision(17);
    for (Index k = 0; k < data.p(); ++k) out << (k ? "," : "") << data.names()[k];
    if (data.has_response()) out << ",y";
    out << '\n';
    for (Index i = 0; i < data.n(); ++i) {
        for (Index k = 0; k < data.p(); ++k)
            out << (k ? "," : "") << data.x()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
        if (data.has_response()) out << ',' << data.y()(static_cast<Eigen::Index>(i));
        out << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// LambdaGrid

LambdaGrid::LambdaGrid(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw ConfigError("lambda grid is empty");
    for (Index g = 0; g < values_.size(); ++g) {
        if (!(values_[g] > 0.0) || !std::isfinite(values_[g]))
            throw ConfigError("lambda grid value " + std::to_string(g) + " must be finite and positive");
        if (g > 0 && !(values_[g] < values_[g - 1]))
            throw ConfigError("lambda grid must be strictly decreasing (index " + std::to_string(g) + ")");
    }
}

LambdaGrid LambdaGrid::geometric(double lambda_max, Index count, double ratio) {
    if (!(lambda_max > 0.0)) throw ConfigError("lambda_max must be positive (is the response constant?)");
    if (count == 0) throw ConfigError("grid needs at least one point");
    if (!(ratio > 0.0 && ratio < 1.0) && count > 1) throw ConfigError("grid ratio must lie in (0, 1)");
    std::vector<double> values(count);
    for (Index g = 0; g < count; ++g) {
        const double t = count == 1 ? 0.0 : static_cast<double>(g) / static_cast<double>(count - 1);
        values[g] = lambda_max * std::pow(ratio, t);
    }
    return LambdaGrid(std::move(values));
}

LambdaGrid LambdaGrid::steps(Index count) {
    std::vector<double> values(count);
    for (Index g = 0; g < count; ++g) values[g] = static_cast<double>(count - g);
    return LambdaGrid(std::move(values));
}

// ---------------------------------------------------------------------------
// SelectionSet

SelectionSet::SelectionSet(Index universe, std::span<const Index> members) : bits_(universe, 0) {
    for (Index k : members) insert(k);
}

SelectionSet::SelectionSet(Index universe, std::initializer_list<Index> members)
    : SelectionSet(universe, std::span<const Index>(members.begin(), members.size())) {}

void SelectionSet::insert(Index k) {
    if (k >= bits_.size())
        throw DataError("index " + std::to_string(k) + " outside universe of size " + std::to_string(bits_.size()));
    bits_[k] = 1;
}

void SelectionSet::erase(Index k) {
    if (k < bits_.size()) bits_[k] = 0;
}

Index SelectionSet::count() const { return static_cast<Index>(std::count(bits_.begin(), bits_.end(), 1)); }

std::vector<Index> SelectionSet::members() const {
    std::vector<Index> out;
    for (Index k = 0; k < bits_.size(); ++k)
        if (bits_[k]) out.push_back(k);
    return out;
}

bool SelectionSet::is_subset_of(const SelectionSet& other) const {
    for (Index k = 0; k < bits_.size(); ++k)
        if (bits_[k] && !other.contains(k)) return false;
    return true;
}

SelectionSet SelectionSet::intersect(const SelectionSet& other) const {
    SelectionSet out(universe());
    for (Index k = 0; k < bits_.size(); ++k) out.bits_[k] = bits_[k] && other.contains(k);
    return out;
}

void SelectionSet::unite(const SelectionSet& other) {
    if (other.universe() > universe()) bits_.resize(other.universe(), 0);
    for (Index k = 0; k < other.universe(); ++k)
        if (other.contains(k)) bits_[k] = 1;
}

// ---------------------------------------------------------------------------

SelectionSet CoefficientPath::support(Index g) const {
    SelectionSet s(static_cast<Index>(coef.rows()));
    for (Eigen::Index k = 0; k < coef.rows(); ++k)
        if (coef(k, static_cast<Eigen::Index>(g)) != 0.0) s.insert(static_cast<Index>(k));
    return s;
}

std::vector<SelectionSet> CoefficientPath::supports() const {
    std::vector<SelectionSet> out;
    out.reserve(grid.size());
    for (Index g = 0; g < grid.size(); ++g) out.push_back(support(g));
    return out;
}

}  // namespace stabsel
