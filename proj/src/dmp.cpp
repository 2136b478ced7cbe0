#include "ptamp/dmp.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"

namespace ptamp {

using nlohmann::json;

namespace {

double goal_scale(double g, double y0) {
    double s = g - y0;
    return std::abs(s) < 1e-6 ? 1.0 : s;
}

// Central differences with one-sided ends; handles non-uniform spacing.
Eigen::MatrixXd derivative(const std::vector<double>& t, const Eigen::MatrixXd& y) {
    const long n = y.rows();
    Eigen::MatrixXd d(n, y.cols());
    for (long k = 0; k < n; ++k) {
        long a = k == 0 ? 0 : k - 1, b = k == n - 1 ? n - 1 : k + 1;
        d.row(k) = (y.row(b) - y.row(a)) / (t[static_cast<size_t>(b)] - t[static_cast<size_t>(a)]);
    }
    return d;
}

}  // namespace

double Trajectory::path_length() const {
    double s = 0;
    for (long k = 1; k < y.rows(); ++k) s += (y.row(k) - y.row(k - 1)).norm();
    return s;
}

void make_basis(const DmpGains& gains, std::vector<double>& centers, std::vector<double>& widths) {
    const int n = gains.n_basis;
    centers.assign(static_cast<size_t>(n), 1.0);
    widths.assign(static_cast<size_t>(n), 1.0);
    for (int i = 0; i < n; ++i)
        centers[static_cast<size_t>(i)] = std::exp(-gains.alpha_x * (n == 1 ? 0.0 : static_cast<double>(i) / (n - 1)));
    for (int i = 0; i + 1 < n; ++i) {
        double d = centers[static_cast<size_t>(i + 1)] - centers[static_cast<size_t>(i)];
        widths[static_cast<size_t>(i)] = 8.0 / (d * d);
    }
    if (n > 1) widths[static_cast<size_t>(n - 1)] = widths[static_cast<size_t>(n - 2)];
}

Eigen::VectorXd basis(const std::vector<double>& centers, const std::vector<double>& widths, double x) {
    Eigen::VectorXd psi(static_cast<long>(centers.size()));
    for (size_t i = 0; i < centers.size(); ++i)
        psi(static_cast<long>(i)) = std::exp(-widths[i] * (x - centers[i]) * (x - centers[i]));
    return psi;
}

Eigen::VectorXd DmpModel::forcing(double x) const {
    Eigen::VectorXd psi = basis(centers, widths, x);
    double s = psi.sum();
    if (s < 1e-300) return Eigen::VectorXd::Zero(dofs());
    return weights * psi * (x / s);
}

Eigen::VectorXd fit_forcing(const std::vector<double>& x, const Eigen::VectorXd& f,
                            const std::vector<double>& centers, const std::vector<double>& widths,
                            FitMethod method) {
    const long n = static_cast<long>(centers.size());
    const long m = static_cast<long>(x.size());
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    if (method == FitMethod::LocallyWeighted) {
        for (long i = 0; i < n; ++i) {
            double num = 0, den = 0;
            for (long k = 0; k < m; ++k) {
                double xk = x[static_cast<size_t>(k)];
                double psi = std::exp(-widths[static_cast<size_t>(i)] * (xk - centers[static_cast<size_t>(i)]) *
                                      (xk - centers[static_cast<size_t>(i)]));
                num += psi * xk * f(k);
                den += psi * xk * xk;
            }
            w(i) = den > 1e-300 ? num / den : 0.0;
        }
        return w;
    }
    Eigen::MatrixXd phi(m, n);
    for (long k = 0; k < m; ++k) {
        Eigen::VectorXd psi = basis(centers, widths, x[static_cast<size_t>(k)]);
        phi.row(k) = psi.transpose() * (x[static_cast<size_t>(k)] / psi.sum());
    }
    return phi.colPivHouseholderQr().solve(f);
}

DmpModel train_dmp(const Trajectory& demo, const DmpGains& gains, FitMethod method) {
    if (gains.alpha_z <= 0 || gains.beta_z <= 0 || gains.alpha_x <= 0 || gains.n_basis < 1)
        throw Error("DMP gains must be positive");
    const long n = static_cast<long>(demo.size());
    if (n < gains.n_basis + 2) throw Error("demo needs at least n_basis + 2 samples");
    if (demo.y.rows() != n) throw Error("demo times and samples differ in length");
    const double tau = demo.t.back() - demo.t.front();
    if (!(tau > 0)) throw Error("demo has zero duration");
    for (long k = 1; k < n; ++k)
        if (!(demo.t[static_cast<size_t>(k)] > demo.t[static_cast<size_t>(k - 1)]))
            throw Error("demo timestamps must increase strictly");

    DmpModel m;
    m.gains = gains;
    m.duration = tau;
    make_basis(gains, m.centers, m.widths);
    m.y0 = demo.y.row(0).transpose();
    m.goal = demo.y.row(n - 1).transpose();
    Eigen::MatrixXd yd = derivative(demo.t, demo.y);
    Eigen::MatrixXd ydd = derivative(demo.t, yd);
    m.v0 = yd.row(0).transpose();
    std::vector<double> x(static_cast<size_t>(n));
    for (long k = 0; k < n; ++k)
        x[static_cast<size_t>(k)] = std::exp(-gains.alpha_x * (demo.t[static_cast<size_t>(k)] - demo.t.front()) / tau);
    const int D = demo.dofs();
    m.weights = Eigen::MatrixXd::Zero(D, gains.n_basis);
    for (int d = 0; d < D; ++d) {
        double g = m.goal(d), s = goal_scale(g, m.y0(d));
        Eigen::VectorXd f(n);
        for (long k = 0; k < n; ++k)
            f(k) = (tau * tau * ydd(k, d) - gains.alpha_z * (gains.beta_z * (g - demo.y(k, d)) - tau * yd(k, d))) / s;
        m.weights.row(d) = fit_forcing(x, f, m.centers, m.widths, method).transpose();
    }
    return m;
}

Trajectory rollout(const DmpModel& m, const Eigen::VectorXd& start, const Eigen::VectorXd& goal, double duration,
                   double dt) {
    if (!(dt > 0)) throw Error("rollout needs dt > 0");
    if (!(duration > 0)) throw Error("rollout needs a positive duration");
    const int D = m.dofs();
    if (start.size() != D || goal.size() != D) throw Error("rollout endpoints have the wrong dimension");
    const long steps = std::max<long>(1, std::lround(duration / dt));
    const double h = duration / static_cast<double>(steps);
    const double tau = duration;
    const auto& G = m.gains;
    Eigen::VectorXd scale(D), y = start, z(D);
    for (int d = 0; d < D; ++d) {
        double demo_s = goal_scale(m.goal(d), m.y0(d));
        double new_s = goal_scale(goal(d), start(d));
        scale(d) = new_s;
        // initial velocity transferred in normalised time, scaled like the forcing term
        z(d) = m.duration * m.v0(d) * (new_s / demo_s);
    }
    Trajectory tr;
    tr.t.resize(static_cast<size_t>(steps + 1));
    tr.y.resize(steps + 1, D);
    double x = 1.0;
    tr.t[0] = 0;
    tr.y.row(0) = y.transpose();
    for (long k = 1; k <= steps; ++k) {
        Eigen::VectorXd f = m.forcing(x).cwiseProduct(scale);
        Eigen::VectorXd zdot = (G.alpha_z * (G.beta_z * (goal - y) - z) + f) / tau;
        Eigen::VectorXd ydot = z / tau;
        double xdot = -G.alpha_x * x / tau;
        z += zdot * h;
        y += ydot * h;
        x += xdot * h;
        tr.t[static_cast<size_t>(k)] = h * static_cast<double>(k);
        tr.y.row(k) = y.transpose();
    }
    return tr;
}

Trajectory modulate_via(const DmpModel& m, const Eigen::VectorXd& start, const Eigen::VectorXd& goal,
                        const Eigen::VectorXd& via, double t_ratio, double duration, double dt) {
    if (!(t_ratio > 0 && t_ratio < 1)) throw Error("via t_ratio must lie in (0, 1)");
    Trajectory a = rollout(m, start, via, t_ratio * duration, dt);
    a.y.row(a.y.rows() - 1) = via.transpose();
    Trajectory b = rollout(m, via, goal, (1 - t_ratio) * duration, dt);
    Trajectory out;
    const long na = a.y.rows(), nb = b.y.rows();
    out.y.resize(na + nb - 1, a.y.cols());
    out.y.topRows(na) = a.y;
    out.y.bottomRows(nb - 1) = b.y.bottomRows(nb - 1);
    out.t = a.t;
    for (long k = 1; k < nb; ++k) out.t.push_back(a.t.back() + b.t[static_cast<size_t>(k)]);
    return out;
}

Trajectory minimum_jerk(const Eigen::VectorXd& from, const Eigen::VectorXd& to, double duration, int samples) {
    Trajectory tr;
    tr.y.resize(samples, from.size());
    for (int k = 0; k < samples; ++k) {
        double s = static_cast<double>(k) / (samples - 1);
        double b = 10 * std::pow(s, 3) - 15 * std::pow(s, 4) + 6 * std::pow(s, 5);
        tr.t.push_back(s * duration);
        tr.y.row(k) = (from + (to - from) * b).transpose();
    }
    return tr;
}

Eigen::VectorXd pose_vec(const Pose& p) {
    Eigen::VectorXd v(4);
    v << p.x, p.y, p.z, p.yaw;
    return v;
}

Pose vec_pose(const Eigen::VectorXd& v) { return Pose{v(0), v(1), v(2), v(3)}; }

std::string dmp_to_json(const DmpModel& m) {
    json j;
    j["version"] = 1;
    j["alpha_z"] = m.gains.alpha_z;
    j["beta_z"] = m.gains.beta_z;
    j["alpha_x"] = m.gains.alpha_x;
    j["n_basis"] = m.gains.n_basis;
    j["duration"] = m.duration;
    j["centers"] = m.centers;
    j["widths"] = m.widths;
    auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    j["y0"] = vec(m.y0);
    j["goal"] = vec(m.goal);
    j["v0"] = vec(m.v0);
    json w = json::array();
    for (long d = 0; d < m.weights.rows(); ++d) w.push_back(vec(m.weights.row(d).transpose()));
    j["weights"] = w;
    return j.dump(2);
}

DmpModel dmp_from_json(const std::string& text) {
    json j = json::parse(text);
    if (j.value("version", 0) != 1) throw Error("unsupported DMP model version");
    DmpModel m;
    m.gains.alpha_z = j.at("alpha_z");
    m.gains.beta_z = j.at("beta_z");
    m.gains.alpha_x = j.at("alpha_x");
    m.gains.n_basis = j.at("n_basis");
    m.duration = j.at("duration");
    m.centers = j.at("centers").get<std::vector<double>>();
    m.widths = j.at("widths").get<std::vector<double>>();
    auto vec = [](const json& a) {
        auto v = a.get<std::vector<double>>();
        return Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<long>(v.size())));
    };
    m.y0 = vec(j.at("y0"));
    m.goal = vec(j.at("goal"));
    m.v0 = vec(j.at("v0"));
    const auto& w = j.at("weights");
    m.weights.resize(static_cast<long>(w.size()), m.gains.n_basis);
    for (size_t d = 0; d < w.size(); ++d) m.weights.row(static_cast<long>(d)) = vec(w[d]).transpose();
    return m;
}

std::string trajectory_csv(const Trajectory& tr) {
    std::ostringstream os;
    os.precision(10);
    os << "t,x,y,z,yaw\n";
    for (size_t k = 0; k < tr.size(); ++k) {
        os << tr.t[k];
        for (long d = 0; d < 4; ++d) os << "," << (d < tr.y.cols() ? tr.y(static_cast<long>(k), d) : 0.0);
        os << "\n";
    }
    return os.str();
}

std::map<std::string, DmpModel> default_dmp_registry(const std::vector<std::string>& actions) {
    Eigen::VectorXd from(4), to(4);
    from << 0.0, 0.0, 0.4, 0.0;
    to << 0.3, 0.2, 0.05, 0.5;
    DmpModel m = train_dmp(minimum_jerk(from, to, 1.0, 201));
    std::map<std::string, DmpModel> reg;
    for (const auto& a : actions) reg[a] = m;
    return reg;
}

}  // namespace ptamp
