#include "madl/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace madlab {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

[[noreturn]] void row_error(const std::filesystem::path& path, std::size_t line_no,
                            const std::string& what) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + what);
}

}  // namespace

ReturnSegment segment(const ReturnSeries& r, std::size_t begin, std::size_t end) {
    if (begin > end || end > r.size()) {
        throw std::invalid_argument("return segment [" + std::to_string(begin) + ", " +
                                    std::to_string(end) + ") out of bounds for series of length " +
                                    std::to_string(r.size()));
    }
    return ReturnSegment{
        std::span<const Date>(r.dates).subspan(begin, end - begin),
        std::span<const double>(r.returns).subspan(begin, end - begin),
        r.periods_per_year,
    };
}

PriceSeries load_price_csv(const std::filesystem::path& path, const CsvSchema& schema,
                           std::string asset_id) {
    std::ifstream file(path);
    if (!file.is_open()) {
        throw std::runtime_error("cannot open price file: " + path.string());
    }

    std::string line;
    if (!std::getline(file, line)) {
        throw std::runtime_error(path.string() + ": empty file, expected a header row");
    }
    const auto header = split_csv_line(line);
    std::ptrdiff_t date_col = -1;
    std::ptrdiff_t close_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == schema.date_column) date_col = static_cast<std::ptrdiff_t>(i);
        if (header[i] == schema.close_column) close_col = static_cast<std::ptrdiff_t>(i);
    }
    if (date_col < 0) {
        throw std::runtime_error(path.string() + ": header has no '" + schema.date_column +
                                 "' column");
    }
    if (close_col < 0) {
        throw std::runtime_error(path.string() + ": header has no '" + schema.close_column +
                                 "' column");
    }

    struct Row {
        Date date;
        double price;
        std::size_t line_no;
    };
    std::vector<Row> rows;
    std::size_t line_no = 1;
    while (std::getline(file, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        const auto need = static_cast<std::size_t>(std::max(date_col, close_col)) + 1;
        if (fields.size() < need) {
            row_error(path, line_no, "expected at least " + std::to_string(need) + " columns, got " +
                                         std::to_string(fields.size()));
        }
        Date date;
        if (!Date::try_parse(fields[static_cast<std::size_t>(date_col)], date)) {
            row_error(path, line_no,
                      "unparseable date '" + fields[static_cast<std::size_t>(date_col)] + "'");
        }
        double price = 0.0;
        try {
            std::size_t consumed = 0;
            const std::string& text = fields[static_cast<std::size_t>(close_col)];
            price = std::stod(text, &consumed);
            if (consumed != text.size()) throw std::invalid_argument(text);
        } catch (const std::exception&) {
            row_error(path, line_no,
                      "unparseable price '" + fields[static_cast<std::size_t>(close_col)] + "'");
        }
        if (!(price > 0.0) || !std::isfinite(price)) {
            row_error(path, line_no, "non-positive price " + std::to_string(price));
        }
        rows.push_back(Row{date, price, line_no});
    }
    if (rows.empty()) {
        throw std::runtime_error(path.string() + ": no data rows");
    }

    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].date == rows[i - 1].date) {
            row_error(path, rows[i].line_no, "duplicate date " + rows[i].date.to_string());
        }
    }

    PriceSeries out;
    out.asset_id = asset_id.empty() ? path.stem().string() : std::move(asset_id);
    out.dates.reserve(rows.size());
    out.prices.reserve(rows.size());
    for (const auto& row : rows) {
        out.dates.push_back(row.date);
        out.prices.push_back(row.price);
    }
    return out;
}

ReturnSeries to_simple_returns(const PriceSeries& p, int periods_per_year) {
    if (p.size() < 2) {
        throw std::invalid_argument("need at least 2 prices to compute returns, got " +
                                    std::to_string(p.size()));
    }
    if (periods_per_year <= 0) {
        throw std::invalid_argument("periods_per_year must be positive");
    }
    ReturnSeries out;
    out.periods_per_year = periods_per_year;
    out.dates.assign(p.dates.begin() + 1, p.dates.end());
    out.returns.resize(p.size() - 1);
    for (std::size_t i = 1; i < p.size(); ++i) {
        out.returns[i - 1] = p.prices[i] / p.prices[i - 1] - 1.0;
    }
    return out;
}

Standardizer fit_standardizer(const ReturnSeries& r, std::size_t begin, std::size_t end) {
    if (begin >= end || end > r.size()) {
        throw std::invalid_argument("standardizer window [" + std::to_string(begin) + ", " +
                                    std::to_string(end) + ") out of bounds");
    }
    const std::size_t n = end - begin;
    if (n < 2) {
        throw std::invalid_argument("standardizer window must hold at least 2 values");
    }
    double mean = 0.0;
    for (std::size_t i = begin; i < end; ++i) mean += r.returns[i];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        const double d = r.returns[i] - mean;
        var += d * d;
    }
    var /= static_cast<double>(n);
    return Standardizer{mean, std::sqrt(var)};
}

SequenceSet make_sequences(const ReturnSeries& r, std::size_t sequence_length,
                           const Standardizer& s) {
    if (sequence_length == 0) throw std::invalid_argument("sequence_length must be positive");
    if (r.size() <= sequence_length) {
        throw std::invalid_argument("series of length " + std::to_string(r.size()) +
                                    " too short for sequence_length " +
                                    std::to_string(sequence_length));
    }
    return make_sequences_for_targets(r, sequence_length, s, sequence_length, r.size());
}

SequenceSet make_sequences_for_targets(const ReturnSeries& r, std::size_t sequence_length,
                                       const Standardizer& s, std::size_t target_begin,
                                       std::size_t target_end) {
    if (sequence_length == 0) throw std::invalid_argument("sequence_length must be positive");
    if (s.degenerate()) {
        throw std::invalid_argument("degenerate standardizer (std = 0); cannot build sequences");
    }
    if (target_begin < sequence_length || target_begin >= target_end || target_end > r.size()) {
        throw std::invalid_argument("target range [" + std::to_string(target_begin) + ", " +
                                    std::to_string(target_end) +
                                    ") invalid for sequence_length " +
                                    std::to_string(sequence_length) + " over series of length " +
                                    std::to_string(r.size()));
    }
    const std::size_t count = target_end - target_begin;
    SequenceSet set;
    set.inputs.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(sequence_length));
    set.targets.resize(count);
    set.target_dates.resize(count);
    for (std::size_t j = 0; j < count; ++j) {
        const std::size_t target = target_begin + j;
        for (std::size_t k = 0; k < sequence_length; ++k) {
            set.inputs(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) =
                s.apply(r.returns[target - sequence_length + k]);
        }
        set.targets[j] = r.returns[target];
        set.target_dates[j] = r.dates[target];
    }
    return set;
}

WalkForwardPlan plan_walk_forward(std::size_t n, std::size_t train_len, std::size_t test_len) {
    if (train_len == 0 || test_len == 0) {
        throw std::invalid_argument("train_len and test_len must be positive");
    }
    if (n <= train_len) {
        throw std::invalid_argument("need n > train_len, got n=" + std::to_string(n) +
                                    " train_len=" + std::to_string(train_len));
    }
    WalkForwardPlan plan;
    for (std::size_t start = 0; start + train_len < n; start += test_len) {
        WalkForwardWindow w;
        w.train_start = start;
        w.train_end = start + train_len;
        w.test_start = w.train_end;
        w.test_end = std::min(w.test_start + test_len, n);
        plan.windows.push_back(w);
    }
    return plan;
}

}  // namespace madlab
