#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ptamp/core.hpp"

namespace ptamp {

struct DmpGains {
    double alpha_z = 25.0;
    double beta_z = 25.0 / 4.0;
    double alpha_x = 25.0 / 3.0;
    int n_basis = 20;
};

enum class FitMethod { LocallyWeighted, LeastSquares };

// Samples of a D-dimensional path; rows are timesteps.
struct Trajectory {
    std::vector<double> t;
    Eigen::MatrixXd y;

    int dofs() const { return static_cast<int>(y.cols()); }
    size_t size() const { return t.size(); }
    double path_length() const;
};

struct DmpModel {
    DmpGains gains;
    double duration = 1.0;
    std::vector<double> centers, widths;
    Eigen::MatrixXd weights;     // dofs x n_basis
    Eigen::VectorXd y0, goal;    // demo endpoints
    Eigen::VectorXd v0;          // demo initial velocity

    int dofs() const { return static_cast<int>(weights.rows()); }
    // Forcing term per DoF at phase x, before the (g - y0) scaling.
    Eigen::VectorXd forcing(double x) const;
};

// Basis values psi_i(x) for the model's centers and widths.
Eigen::VectorXd basis(const std::vector<double>& centers, const std::vector<double>& widths, double x);
void make_basis(const DmpGains& gains, std::vector<double>& centers, std::vector<double>& widths);

DmpModel train_dmp(const Trajectory& demo, const DmpGains& gains = {},
                   FitMethod method = FitMethod::LocallyWeighted);

// Fits weights of one DoF to forcing samples f(x) already divided by the
// goal scale. Exposed for exactness checks.
Eigen::VectorXd fit_forcing(const std::vector<double>& x, const Eigen::VectorXd& f,
                            const std::vector<double>& centers, const std::vector<double>& widths,
                            FitMethod method);

Trajectory rollout(const DmpModel& model, const Eigen::VectorXd& start, const Eigen::VectorXd& goal,
                   double duration, double dt = 0.002);

// Two chained rollouts meeting exactly at `via` at time t_ratio * duration.
Trajectory modulate_via(const DmpModel& model, const Eigen::VectorXd& start, const Eigen::VectorXd& goal,
                        const Eigen::VectorXd& via, double t_ratio, double duration, double dt = 0.002);

// Minimum-jerk reference path sampled at `samples` points.
Trajectory minimum_jerk(const Eigen::VectorXd& from, const Eigen::VectorXd& to, double duration, int samples);

Eigen::VectorXd pose_vec(const Pose& p);
Pose vec_pose(const Eigen::VectorXd& v);

std::string dmp_to_json(const DmpModel& m);
DmpModel dmp_from_json(const std::string& text);
std::string trajectory_csv(const Trajectory& tr);  // t,x,y,z,yaw

// One model per action name, trained on a shipped minimum-jerk reach.
std::map<std::string, DmpModel> default_dmp_registry(const std::vector<std::string>& actions);

}  // namespace ptamp
