#include "stakeopt/reward.hpp"

#include "stakeopt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace stakeopt {

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

RewardSchedule RewardSchedule::polynomial(double alpha, double initial_supply, double horizon)
{
    if (!(alpha > 0.0 && alpha <= 8.0)) {
        throw DomainError("polynomial schedule: alpha must lie in (0, 8]");
    }
    if (!(initial_supply > 0.0) || !std::isfinite(initial_supply)) {
        throw DomainError("polynomial schedule: initial supply must be positive");
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw DomainError("schedule horizon must be positive");
    }
    RewardSchedule s;
    s.kind_ = Kind::Polynomial;
    s.alpha_ = alpha;
    s.n0_ = initial_supply;
    s.root_ = std::pow(initial_supply, 1.0 / alpha);
    s.horizon_ = horizon;
    if (!std::isfinite(s.supply(horizon))) {
        throw DomainError("polynomial schedule: N(T) overflows");
    }
    return s;
}

RewardSchedule RewardSchedule::tabulated(std::vector<std::pair<double, double>> knots, double horizon)
{
    if (knots.empty() || knots.front().first != 0.0) {
        throw ConfigError("tabulated schedule: first knot must be at t = 0");
    }
    std::vector<double> t;
    std::vector<double> n;
    for (std::size_t i = 0; i < knots.size(); ++i) {
        const auto [ti, ni] = knots[i];
        if (!(ni > 0.0)) {
            throw ConfigError("tabulated schedule: N must be positive (knot " + std::to_string(i) + ")");
        }
        if (i > 0 && !(ti > knots[i - 1].first)) {
            throw ConfigError("tabulated schedule: t must be strictly increasing (knot " + std::to_string(i) + ")");
        }
        if (i > 0 && ni < knots[i - 1].second) {
            throw ConfigError("tabulated schedule: N must be non-decreasing (knot " + std::to_string(i) + ")");
        }
        t.push_back(ti);
        n.push_back(ni);
    }
    const double last = t.back();
    if (horizon < 0.0) horizon = last;
    if (!(horizon > 0.0) || horizon > last) {
        throw ConfigError("tabulated schedule: horizon must lie in (0, last knot]");
    }
    RewardSchedule s;
    s.kind_ = Kind::Tabulated;
    s.n0_ = n.front();
    s.horizon_ = horizon;
    s.table_ = numerics::MonotoneCubic(std::move(t), std::move(n));
    return s;
}

RewardSchedule RewardSchedule::with_horizon(double horizon) const
{
    if (kind_ == Kind::Polynomial) {
        return polynomial(alpha_, n0_, horizon);
    }
    if (!(horizon > 0.0) || horizon > table_.knots().back()) {
        throw ConfigError("tabulated schedule: horizon must lie in (0, last knot]");
    }
    RewardSchedule s = *this;
    s.horizon_ = horizon;
    return s;
}

double RewardSchedule::checked_time(double t, const char* op) const
{
    const double slack = 1e-12 * std::max(1.0, horizon_);
    if (!(t >= -slack && t <= horizon_ + slack)) {
        throw DomainError(std::string(op) + ": t = " + std::to_string(t) + " outside [0, T]");
    }
    return std::clamp(t, 0.0, horizon_);
}

double RewardSchedule::supply(double t) const
{
    t = checked_time(t, "total_supply");
    if (kind_ == Kind::Polynomial) {
        return std::pow(root_ + t, alpha_);
    }
    return table_(t);
}

double RewardSchedule::rate(double t) const
{
    t = checked_time(t, "reward_rate");
    if (kind_ == Kind::Polynomial) {
        return alpha_ * std::pow(root_ + t, alpha_ - 1.0);
    }
    return table_.derivative(t);
}

double RewardSchedule::inverse_integral(double t0, double t1) const
{
    if (t0 > t1) {
        throw DomainError("inverse_supply_integral: t0 > t1");
    }
    t0 = checked_time(t0, "inverse_supply_integral");
    t1 = checked_time(t1, "inverse_supply_integral");
    if (t0 == t1) return 0.0;
    if (kind_ == Kind::Polynomial) {
        // (u1^{1-a} - u0^{1-a}) / (1-a), written to stay accurate as a -> 1.
        const double u0 = root_ + t0;
        const double log_ratio = std::log1p((t1 - t0) / u0);
        const double c = 1.0 - alpha_;
        if (std::abs(c) < 1e-12) {
            return log_ratio;
        }
        return std::pow(u0, c) * std::expm1(c * log_ratio) / c;
    }
    const auto bps = breakpoints();
    return numerics::integrate_piecewise([this](double s) { return 1.0 / table_(s); }, t0, t1, bps);
}

std::vector<double> RewardSchedule::breakpoints() const
{
    if (kind_ == Kind::Polynomial) return {};
    std::vector<double> out;
    for (double k : table_.knots()) {
        if (k > 0.0 && k < horizon_) out.push_back(k);
    }
    return out;
}

RewardSchedule load_schedule_csv(const std::filesystem::path& path, double horizon)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open schedule file " + path.string());
    }
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    std::vector<std::pair<double, double>> knots;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string body = trim(line);
        if (body.empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
        if (!header_seen) {
            std::string compact;
            for (char c : body) {
                if (c != ' ' && c != '\t') compact += c;
            }
            if (compact != "t,N") {
                throw ConfigError(where + "expected header `t,N`");
            }
            header_seen = true;
            continue;
        }
        const auto comma = body.find(',');
        if (comma == std::string::npos) {
            throw ConfigError(where + "expected two comma-separated values");
        }
        double t = 0.0;
        double n = 0.0;
        try {
            std::size_t used = 0;
            const std::string a = trim(body.substr(0, comma));
            const std::string b = trim(body.substr(comma + 1));
            t = std::stod(a, &used);
            if (used != a.size()) throw std::invalid_argument(a);
            n = std::stod(b, &used);
            if (used != b.size()) throw std::invalid_argument(b);
        } catch (const std::exception&) {
            throw ConfigError(where + "malformed number");
        }
        if (knots.empty() && t != 0.0) {
            throw ConfigError(where + "first row must have t = 0");
        }
        if (!knots.empty() && !(t > knots.back().first)) {
            throw ConfigError(where + "t must be strictly increasing");
        }
        if (!(n > 0.0)) {
            throw ConfigError(where + "N must be positive");
        }
        if (!knots.empty() && n < knots.back().second) {
            throw ConfigError(where + "N must be non-decreasing");
        }
        knots.emplace_back(t, n);
    }
    if (!header_seen) {
        throw ConfigError(path.string() + ": empty schedule file");
    }
    return RewardSchedule::tabulated(std::move(knots), horizon);
}

double total_supply(const RewardSchedule& sched, double t) { return sched.supply(t); }
double reward_rate(const RewardSchedule& sched, double t) { return sched.rate(t); }
double inverse_supply_integral(const RewardSchedule& sched, double t0, double t1)
{
    return sched.inverse_integral(t0, t1);
}

}  // namespace stakeopt
