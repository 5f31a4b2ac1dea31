#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "geostorage/geostorage.hpp"

namespace testing_support {

using namespace geostorage;

inline Material soil() { return {2000.0, 1.8, 800.0}; }
inline Material water() { return {1000.0, 0.6, 4180.0}; }
inline Material unit_material() { return {1.0, 1.0, 1.0}; }

/// a_F = a_M = 1, h_x = h_y = 1, v = 1.
inline StorageConfig unit_config() {
  StorageConfig c;
  c.length_x = 6.0;
  c.length_y = 7.0;
  c.nx = 6;
  c.ny = 7;
  c.medium = unit_material();
  c.fluid = unit_material();
  c.pump_velocity = 1.0;
  c.ground_transfer = 1.0;
  c.phx = {{3, 3}};
  c.horizon = 1.0;
  return c;
}

/// Soil/water storage whose matrix contains all fourteen row archetypes.
inline StorageConfig golden_config() {
  StorageConfig c;
  c.length_x = 3.0;
  c.length_y = 3.0;
  c.nx = 6;
  c.ny = 12;
  c.medium = soil();
  c.fluid = water();
  c.pump_velocity = 0.01;
  c.ground_transfer = 10.0;
  c.phx = {{5, 7}};
  c.horizon = 3600.0;
  c.ground = {5.0, 10.0, 31557600.0};
  return c;
}

struct DenseSystem {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
};

/// Brute-force dense operator built node by node from the discrete boundary
/// and interface relations, without the library's assembly code.
inline std::array<DenseSystem, 2> dense_reference(const StorageConfig& c) {
  const double hx = c.length_x / c.nx;
  const double hy = c.length_y / c.ny;
  const double am = c.medium.conductivity / (c.medium.density * c.medium.heat_capacity);
  const double af = c.fluid.conductivity / (c.fluid.density * c.fluid.heat_capacity);
  std::map<int, char> kind;  // 'M', 'F', 'L' lower interface, 'U' upper interface
  for (int j = 1; j < c.ny; ++j) kind[j] = 'M';
  for (const auto& p : c.phx) {
    kind[p.first_fluid_row - 1] = 'L';
    kind[p.last_fluid_row + 1] = 'U';
    for (int j = p.first_fluid_row; j <= p.last_fluid_row; ++j) kind[j] = 'F';
  }
  std::vector<int> rows;
  for (int j = 1; j < c.ny; ++j)
    if (kind[j] == 'M' || kind[j] == 'F') rows.push_back(j);
  const int q = static_cast<int>(rows.size());
  std::map<std::pair<int, int>, int> idx;
  for (int i = 1; i < c.nx; ++i)
    for (int s = 0; s < q; ++s) idx[{i, rows[s]}] = (i - 1) * q + s;
  const int n = static_cast<int>(idx.size());
  const double wf = c.fluid.conductivity / (c.fluid.conductivity + c.medium.conductivity);
  const double wm = 1.0 - wf;
  const double rin = c.medium.conductivity / (c.medium.conductivity + c.ground_transfer * hy);
  const double rg = 1.0 - rin;

  std::array<DenseSystem, 2> out;
  for (int r = 0; r < 2; ++r) {
    const bool on = r == 0;
    const double v0 = on ? c.pump_velocity : 0.0;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, 2);
    for (const auto& [node, l] : idx) {
      const auto [i, j] = node;
      const bool fl = kind[j] == 'F';
      const double east = fl ? af / (hx * hx) : am / (hx * hx);
      const double west = fl ? af / (hx * hx) + v0 / hx : am / (hx * hx);
      const double vert = fl ? af / (hy * hy) : am / (hy * hy);
      a(l, l) = fl ? -2.0 * af * (1 / (hx * hx) + 1 / (hy * hy)) - v0 / hx
                   : -2.0 * am * (1 / (hx * hx) + 1 / (hy * hy));
      if (i + 1 == c.nx) a(l, l) += east; else a(l, idx.at({i + 1, j})) += east;
      if (i - 1 == 0) {
        if (fl && on) b(l, 0) += west; else a(l, l) += west;
      } else {
        a(l, idx.at({i - 1, j})) += west;
      }
      const int jn = j + 1;
      if (jn == c.ny) {
        a(l, l) += vert;
      } else if (kind[jn] == 'L') {
        a(l, l) += wm * vert;
        a(l, idx.at({i, jn + 1})) += wf * vert;
      } else if (kind[jn] == 'U') {
        a(l, l) += wf * vert;
        a(l, idx.at({i, jn + 1})) += wm * vert;
      } else {
        a(l, idx.at({i, jn})) += vert;
      }
      const int js = j - 1;
      if (js == 0) {
        a(l, l) += rin * vert;
        b(l, 1) += rg * vert;
      } else if (kind[js] == 'U') {
        a(l, l) += wm * vert;
        a(l, idx.at({i, js - 1})) += wf * vert;
      } else if (kind[js] == 'L') {
        a(l, l) += wf * vert;
        a(l, idx.at({i, js - 1})) += wm * vert;
      } else {
        a(l, idx.at({i, js})) += vert;
      }
    }
    out[r] = {a, b};
  }
  return out;
}

inline double inf_norm(const Eigen::MatrixXd& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }
inline double inf_norm(const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

/// Full recursion with explicit dense inverses of G.
inline std::vector<Eigen::VectorXd> dense_theta_run(const std::array<DenseSystem, 2>& sys,
                                                    const ThetaStepper& stepper,
                                                    const Eigen::VectorXd& y0) {
  const int n = static_cast<int>(y0.size());
  const double tau = stepper.tau();
  const double theta = stepper.theta();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  std::vector<Eigen::VectorXd> traj{y0};
  Eigen::VectorXd y = y0;
  for (int k = 0; k < stepper.steps(); ++k) {
    const auto& s0 = sys[stepper.regime(k) == PumpRegime::On ? 0 : 1];
    const auto& s1 = sys[stepper.regime(k + 1) == PumpRegime::On ? 0 : 1];
    const Eigen::MatrixXd g_inv = (id - tau * theta * s1.a).inverse();
    const Eigen::MatrixXd h = id + tau * (1.0 - theta) * s0.a;
    const Eigen::VectorXd f = theta * s1.b * stepper.input(k + 1).vector() +
                              (1.0 - theta) * s0.b * stepper.input(k).vector();
    y = g_inv * (h * y + tau * f);
    traj.push_back(y);
  }
  return traj;
}

/// Random valid layout on an nx x ny grid with one or two PHXs.
inline StorageConfig random_config(std::mt19937& rng, int nx, int ny, int phx_count, double lambda) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  StorageConfig c;
  c.nx = nx;
  c.ny = ny;
  c.length_x = 2.0 + 8.0 * u(rng);
  c.length_y = 2.0 + 8.0 * u(rng);
  c.medium = {1500.0 + 1000.0 * u(rng), 0.5 + 2.5 * u(rng), 700.0 + 600.0 * u(rng)};
  c.fluid = {900.0 + 200.0 * u(rng), 0.4 + 0.4 * u(rng), 3500.0 + 1000.0 * u(rng)};
  c.pump_velocity = 0.001 + 0.05 * u(rng);
  c.ground_transfer = lambda;
  // Split the interior rows evenly; each PHX gets 1..3 fluid rows.
  const int band = (ny - 1) / phx_count;
  for (int p = 0; p < phx_count; ++p) {
    const int lo = 1 + p * band;
    const int thickness = 1 + static_cast<int>(u(rng) * 3.0);
    const int first = lo + 2 + static_cast<int>(u(rng) * std::max(1, band - thickness - 4));
    c.phx.push_back({first, first + thickness - 1});
  }
  c.horizon = 3600.0;
  c.validate();
  return c;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("geostorage_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

struct CommandResult {
  int status{};
  std::string output;
};

/// Runs a shell command and captures stdout.
inline CommandResult run_command(const std::string& cmd) {
  CommandResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, {}};
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, got);
  const int status = pclose(pipe);
  r.status = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace testing_support
