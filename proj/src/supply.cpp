#include "mixdiss/supply.hpp"

#include "mixdiss/errors.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace mixdiss {

bool is_finite_gain_mixed(const SupplySpec& spec) {
    return spec.theta.a11 >= 0.0 && spec.theta.a22 < 0.0 && spec.pi.a11 >= 0.0 && spec.pi.a22 < 0.0;
}

void Trajectory::validate() const {
    const std::size_t n = t.size();
    if (n < 2 || u.size() != n || y.size() != n || static_cast<std::size_t>(x.rows()) != n ||
        static_cast<std::size_t>(xdot.rows()) != n || x.cols() != xdot.cols()) {
        throw DimensionMismatch("trajectory arrays must share a length >= 2");
    }
    if (t.front() != 0.0) {
        throw DegenerateGrid("trajectory must start at t = 0");
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (!(t[i] > t[i - 1])) {
            throw DegenerateGrid("non-increasing sample times at index " + std::to_string(i));
        }
    }
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& f) {
    double acc = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) {
        const double dt = t[i] - t[i - 1];
        if (!(dt > 0.0)) {
            throw DegenerateGrid("non-positive time step at index " + std::to_string(i));
        }
        acc += 0.5 * dt * (f[i] + f[i - 1]);
    }
    return acc;
}

double quad_integral(const Trajectory& traj, const SymMat2& s) {
    std::vector<double> f(traj.samples());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double u = traj.u[i];
        const double y = traj.y[i];
        f[i] = s.a11 * u * u + 2.0 * s.a12 * u * y + s.a22 * y * y;
    }
    return trapezoid(traj.t, f);
}

double input_energy(const Trajectory& traj) {
    return quad_integral(traj, SymMat2::diag(1.0, 0.0));
}

TrajectoryDecay check_decay(const Trajectory& traj, double rel) {
    if (traj.states() == 0 || traj.samples() == 0) {
        return {0.0, 0.0, true};
    }
    const Eigen::VectorXd norms = traj.x.rowwise().norm();
    const double terminal = norms(norms.size() - 1);
    const double peak = norms.maxCoeff();
    return {terminal, peak, terminal <= rel * peak};
}

void require_decay(const Trajectory& traj, double rel) {
    const TrajectoryDecay d = check_decay(traj, rel);
    if (!d.decayed) {
        std::ostringstream msg;
        msg << "terminal state norm " << d.terminal_norm << " exceeds " << rel << " * peak " << d.max_norm;
        throw TruncationUnsound(msg.str());
    }
}

const char* to_string(Branch b) {
    switch (b) {
        case Branch::Theta: return "THETA";
        case Branch::PiPsi: return "PI_PSI";
        case Branch::Both: return "BOTH";
        case Branch::Neither: return "NEITHER";
    }
    return "?";
}

double default_classification_tol(const Trajectory& traj) {
    return 1e-6 * (1.0 + input_energy(traj));
}

Classification classify_trajectory(const Trajectory& traj, const SupplySpec& spec, double tol, double decay_rel) {
    traj.validate();
    require_decay(traj, decay_rel);
    if (tol < 0.0) {
        tol = default_classification_tol(traj);
    }
    Classification c{};
    c.tol = tol;
    c.theta_integral = quad_integral(traj, spec.theta);
    c.pi_integral = quad_integral(traj, spec.pi);
    c.psi_integral = quad_integral(traj, spec.psi());
    const bool theta_ok = c.theta_integral >= -tol;
    const bool pi_psi_ok = c.psi_integral >= -tol && c.pi_integral >= -tol;
    if (theta_ok && pi_psi_ok) {
        c.branch = Branch::Both;
    } else if (theta_ok) {
        c.branch = Branch::Theta;
    } else if (pi_psi_ok) {
        c.branch = Branch::PiPsi;
    } else {
        c.branch = Branch::Neither;
    }
    return c;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    const Eigen::Index n = traj.states();
    os << "t,u,y";
    for (Eigen::Index j = 0; j < n; ++j) os << ",x" << j;
    for (Eigen::Index j = 0; j < n; ++j) os << ",xdot" << j;
    os << '\n';
    os << std::setprecision(17);
    for (std::size_t i = 0; i < traj.samples(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        os << traj.t[i] << ',' << traj.u[i] << ',' << traj.y[i];
        for (Eigen::Index j = 0; j < n; ++j) os << ',' << traj.x(r, j);
        for (Eigen::Index j = 0; j < n; ++j) os << ',' << traj.xdot(r, j);
        os << '\n';
    }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        if (!cell.empty() && cell.back() == '\r') cell.pop_back();
        out.push_back(cell);
    }
    return out;
}

}  // namespace

Trajectory read_trajectory_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) {
        throw DimensionMismatch("empty trajectory CSV");
    }
    const std::vector<std::string> header = split_csv(line);
    if (header.size() < 3 || header[0] != "t" || header[1] != "u" || header[2] != "y" ||
        (header.size() - 3) % 2 != 0) {
        throw DimensionMismatch("trajectory CSV header must be t,u,y,x0..,xdot0..");
    }
    const auto n = static_cast<Eigen::Index>((header.size() - 3) / 2);
    for (Eigen::Index j = 0; j < n; ++j) {
        if (header[3 + static_cast<std::size_t>(j)] != "x" + std::to_string(j) ||
            header[3 + static_cast<std::size_t>(n + j)] != "xdot" + std::to_string(j)) {
            throw DimensionMismatch("unexpected trajectory CSV column names");
        }
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_csv(line);
        if (cells.size() != header.size()) {
            throw DimensionMismatch("ragged trajectory CSV row");
        }
        std::vector<double> row(cells.size());
        for (std::size_t k = 0; k < cells.size(); ++k) {
            row[k] = std::stod(cells[k]);
        }
        rows.push_back(std::move(row));
    }
    Trajectory traj;
    const auto m = static_cast<Eigen::Index>(rows.size());
    traj.x.resize(m, n);
    traj.xdot.resize(m, n);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        traj.t.push_back(row[0]);
        traj.u.push_back(row[1]);
        traj.y.push_back(row[2]);
        for (Eigen::Index j = 0; j < n; ++j) {
            traj.x(i, j) = row[3 + static_cast<std::size_t>(j)];
            traj.xdot(i, j) = row[3 + static_cast<std::size_t>(n + j)];
        }
    }
    traj.validate();
    return traj;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    std::ofstream os(path);
    if (!os) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    write_trajectory_csv(os, traj);
}

Trajectory read_trajectory_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) {
        throw std::runtime_error("cannot open " + path);
    }
    return read_trajectory_csv(is);
}

}  // namespace mixdiss
