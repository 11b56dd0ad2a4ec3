#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace stabsel {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = std::size_t;

/// n x p design (columns are predictors) with an optional response.
///
/// Construction validates shape and finiteness. `scale` holds the factor each
/// raw column was divided by (all ones if never normalized), so coefficients
/// fitted on the normalized design map back to raw units by dividing by it.
class Dataset {
public:
    Dataset(Matrix x, std::optional<Vector> y = std::nullopt,
            std::vector<std::string> names = {});

    Index n() const { return static_cast<Index>(x_.rows()); }
    Index p() const { return static_cast<Index>(x_.cols()); }

    const Matrix& x() const { return x_; }
    bool has_response() const { return y_.has_value(); }
    const Vector& y() const;
    const std::vector<std::string>& names() const { return names_; }
    const Vector& scale() const { return scale_; }

    /// Same variables restricted to the given rows. Columns keep the
    /// whole-sample scaling; nothing is renormalized.
    Dataset rows(std::span<const Index> idx) const;

    Dataset with_response(Vector y) const;
    Dataset without_response() const;
    Dataset with_scale(Vector scale) const;

private:
    Matrix x_;
    std::optional<Vector> y_;
    std::vector<std::string> names_;
    Vector scale_;
};

/// Scales every column to unit Euclidean norm. Throws DataError on a zero-norm
/// column or a non-finite entry.
Dataset normalize_columns(const Matrix& raw);
Dataset normalize_columns(const Dataset& data);

struct CsvOptions {
    bool has_header = true;
    std::optional<std::string> response_column;
};

/// Reads a rectangular numeric CSV. Normalization is left to the caller.
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
Dataset parse_csv(std::string_view text, const CsvOptions& options = {});

/// Writes predictors (and the response as a trailing "y" column, when present).
std::string to_csv(const Dataset& data);

/// Ordered, strictly decreasing, positive regularisation values shared by every
/// resample.
class LambdaGrid {
public:
    explicit LambdaGrid(std::vector<double> values);

    /// `count` geometric points from `lambda_max` down to `ratio * lambda_max`.
    static LambdaGrid geometric(double lambda_max, Index count = 100, double ratio = 1e-3);

    /// Grid for step-indexed selectors (OMP): index g stands for g+1 steps.
    static LambdaGrid steps(Index count);

    Index size() const { return values_.size(); }
    double operator[](Index g) const { return values_[g]; }
    const std::vector<double>& values() const { return values_; }
    double max() const { return values_.front(); }

private:
    std::vector<double> values_;
};

/// Subset of {0, ..., p-1}.
class SelectionSet {
public:
    SelectionSet() = default;
    explicit SelectionSet(Index universe) : bits_(universe, 0) {}
    SelectionSet(Index universe, std::span<const Index> members);
    SelectionSet(Index universe, std::initializer_list<Index> members);

    Index universe() const { return bits_.size(); }
    bool contains(Index k) const { return k < bits_.size() && bits_[k] != 0; }
    void insert(Index k);
    void erase(Index k);
    Index count() const;
    bool empty() const { return count() == 0; }
    std::vector<Index> members() const;

    bool is_subset_of(const SelectionSet& other) const;
    SelectionSet intersect(const SelectionSet& other) const;
    void unite(const SelectionSet& other);

    friend bool operator==(const SelectionSet&, const SelectionSet&) = default;

private:
    std::vector<unsigned char> bits_;
};

/// Coefficients per grid point (p x G), columns aligned with the grid.
struct CoefficientPath {
    Matrix coef;
    LambdaGrid grid;

    SelectionSet support(Index g) const;
    std::vector<SelectionSet> supports() const;
};

}  // namespace stabsel
