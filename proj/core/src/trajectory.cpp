#include "stochrobust/trajectory.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>

namespace stochrobust {

std::optional<uint32_t> Trajectory::column(std::string_view name) const {
    for (uint32_t i = 0; i < variables.size(); ++i)
        if (variables[i] == name) return i;
    return std::nullopt;
}

double Trajectory::value_at(double t, uint32_t col) const {
    if (times.empty()) throw Error("empty trajectory");
    auto it = std::upper_bound(times.begin(), times.end(), t);
    size_t i = it == times.begin() ? 0 : static_cast<size_t>(it - times.begin()) - 1;
    if (interp == Interp::step || i + 1 >= rows() || t <= times[i]) return value(i, col);
    double t0 = times[i], t1 = times[i + 1];
    double w = (t - t0) / (t1 - t0);
    return value(i, col) + w * (value(i + 1, col) - value(i, col));
}

void Trajectory::append(double t, std::span<const double> row_vals) {
    times.push_back(t);
    values.insert(values.end(), row_vals.begin(), row_vals.end());
}

namespace {

void put_num(std::string& out, double v) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    out.append(buf, p);
}

}  // namespace

std::string trajectory_to_csv(const Trajectory& tr) {
    std::string out = "t";
    for (const auto& v : tr.variables) {
        out += ',';
        out += v;
    }
    out += '\n';
    for (size_t r = 0; r < tr.rows(); ++r) {
        put_num(out, tr.times[r]);
        for (size_t c = 0; c < tr.cols(); ++c) {
            out += ',';
            put_num(out, tr.value(r, c));
        }
        out += '\n';
    }
    return out;
}

Trajectory trajectory_from_csv(std::string_view csv, Interp interp, double horizon) {
    Trajectory tr;
    tr.interp = interp;
    tr.horizon = horizon;
    size_t pos = 0;
    auto next_line = [&]() -> std::optional<std::string_view> {
        if (pos >= csv.size()) return std::nullopt;
        size_t e = csv.find('\n', pos);
        if (e == std::string_view::npos) e = csv.size();
        std::string_view line = csv.substr(pos, e - pos);
        pos = e + 1;
        return line;
    };
    auto header = next_line();
    if (!header || header->substr(0, 1) != "t")
        throw ParseError("trajectory CSV must start with a 't,...' header");
    size_t c = header->find(',');
    while (c != std::string_view::npos) {
        size_t e = header->find(',', c + 1);
        tr.variables.emplace_back(header->substr(c + 1, (e == std::string_view::npos ? header->size() : e) - c - 1));
        c = e;
    }
    std::vector<double> row(tr.variables.size());
    while (auto line = next_line()) {
        if (line->empty()) continue;
        const char* p = line->data();
        const char* end = p + line->size();
        double t = std::strtod(p, const_cast<char**>(&p));
        for (auto& v : row) {
            if (p >= end || *p != ',') throw ParseError("malformed trajectory CSV row");
            ++p;
            v = std::strtod(p, const_cast<char**>(&p));
        }
        tr.append(t, row);
    }
    if (tr.times.empty()) throw ParseError("trajectory CSV has no samples");
    tr.horizon = std::max(horizon, tr.times.back());
    return tr;
}

}  // namespace stochrobust
