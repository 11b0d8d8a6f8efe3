#pragma once

#include "hmsom/types.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hmsom {

enum class variable_role { operational, environmental, categorical };

struct variable {
    std::string name;
    variable_role role;

    bool operator==(const variable&) const = default;
};

/// Column layout of a cruise-snapshot table.
///
/// The engine index and the timestamp are keys and live outside `variables`.
/// Every entry of `variables` is numeric, including categorical ones such as
/// engine age, which enters the correction model as a regressor.
struct schema {
    std::string engine_column = "ENG";
    std::string time_column = "TIME";
    std::vector<variable> variables;
    /// Allowed engine ids; empty means any id is accepted.
    std::set<engine_id> engines;

    [[nodiscard]] std::size_t size() const noexcept { return variables.size(); }
    [[nodiscard]] std::optional<std::size_t> find(std::string_view name) const;
    /// Index of `name`; throws data_error when absent.
    [[nodiscard]] std::size_t index_of(std::string_view name) const;
    [[nodiscard]] std::vector<std::size_t> indices_with(variable_role role) const;
    [[nodiscard]] std::vector<std::string> names_with(variable_role role) const;

    bool operator==(const schema&) const = default;
};

/// EXH, N2, Temp1, Pres, Temp2, FF (operational); ALT, Temp3, SP, N1
/// (environmental); AGE (other). ENG is the engine key.
[[nodiscard]] schema default_schema();

/// Operational variables of the default schema, in column order.
[[nodiscard]] const std::vector<std::string>& operational_names();

struct snapshot {
    engine_id engine = 0;
    timestamp time = 0;
    std::vector<double> values;  // aligned with schema::variables

    bool operator==(const snapshot&) const = default;
};

/// Ordered collection of snapshots. Tables produced by this library are kept
/// sorted by (engine, time), which smoothing relies on.
struct data_table {
    hmsom::schema schema;
    std::vector<snapshot> rows;

    [[nodiscard]] std::size_t size() const noexcept { return rows.size(); }
    [[nodiscard]] bool empty() const noexcept { return rows.empty(); }
    [[nodiscard]] std::vector<double> column(std::string_view name) const;
    /// rows × names.size() matrix of the named columns.
    [[nodiscard]] row_matrix columns(const std::vector<std::string>& names) const;
    [[nodiscard]] std::set<engine_id> engine_ids() const;
    [[nodiscard]] bool is_sorted() const;

    bool operator==(const data_table&) const = default;
};

/// Stable sort by (engine, time). Throws data_error on duplicate keys.
void sort_rows(data_table& table);

/// Validates every row against the schema: value count, finiteness, declared engines,
/// and unique (engine, time) keys.
void validate(const data_table& table);

[[nodiscard]] data_table load_table(const std::filesystem::path& path, const schema& s = default_schema());
void save_table(const data_table& table, const std::filesystem::path& path);
/// CSV text of a table: header line, then one line per row with shortest round-trip numbers.
[[nodiscard]] std::string to_csv(const data_table& table);
[[nodiscard]] data_table parse_csv(std::string_view text, const schema& s, std::string_view source = "<memory>");

struct split_result {
    data_table train;
    data_table test;
    warning_list warnings;
};

/// Random disjoint partition with exactly `n_train` rows on the training side.
[[nodiscard]] split_result split_train_test(const data_table& table, std::size_t n_train, std::uint64_t seed);

struct normalization {
    std::vector<std::string> names;
    std::vector<double> mean;
    std::vector<double> stddev;

    bool operator==(const normalization&) const = default;
};

/// Per-variable mean and sample (n-1) standard deviation of the named columns.
/// Throws data_error naming the variable when a column is constant.
[[nodiscard]] normalization normalize_fit(const data_table& table, const std::vector<std::string>& names);
/// Fits on every variable of the schema, AGE included.
[[nodiscard]] normalization normalize_fit(const data_table& table);
[[nodiscard]] data_table normalize_apply(const data_table& table, const normalization& coeffs);
[[nodiscard]] data_table denormalize(const data_table& table, const normalization& coeffs);

}  // namespace hmsom
