/*
 Copyright 2026 The adptrack Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef ADPTRACK_IO_HPP
#define ADPTRACK_IO_HPP

// Trace, stack and metrics serialization.

#include "adptrack/sim.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>

namespace adptrack::io {

/// Shortest round-trippable decimal form with 17 significant digits.
inline std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_header(const sim::Trace& tr)
{
    std::string h = "t";
    const auto add = [&h](const std::string& name, Eigen::Index count) {
        for (Eigen::Index i = 1; i <= count; ++i) {
            h += "," + name + "_" + std::to_string(i);
        }
    };
    add("e", tr.n);
    add("x", tr.n);
    add("x_d", tr.n);
    add("u", tr.m);
    add("mu_hat", tr.m);
    add("W_c", tr.L);
    add("W_a", tr.L);
    for (Eigen::Index i = 1; i <= tr.p1; ++i) {
        for (Eigen::Index j = 1; j <= tr.n; ++j) {
            h += ",theta_hat_" + std::to_string(i) + "_" + std::to_string(j);
        }
    }
    h += ",delta_t,mean_abs_delta_i,excitation_level,cbar,gamma_norm,V0,e_norm";
    return h;
}

inline void write_row(std::ostream& out, const sim::TraceRow& r)
{
    std::string line = fmt(r.t);
    const auto add = [&line](const Vector& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            line += "," + fmt(v(i));
        }
    };
    add(r.e);
    add(r.x);
    add(r.x_d);
    add(r.u);
    add(r.mu_hat);
    add(r.W_c);
    add(r.W_a);
    for (Eigen::Index i = 0; i < r.theta_hat.rows(); ++i) {
        for (Eigen::Index j = 0; j < r.theta_hat.cols(); ++j) {
            line += "," + fmt(r.theta_hat(i, j));
        }
    }
    for (double v : {r.delta_t, r.mean_abs_delta_i, r.excitation_level, r.cbar, r.gamma_norm, r.V0,
                     r.e_norm}) {
        line += "," + fmt(v);
    }
    out << line << '\n';
}

/// Writes every stride-th row, always including the first.
inline void write_trace_csv(std::ostream& out, const sim::Trace& tr, std::size_t stride = 1)
{
    out << csv_header(tr) << '\n';
    for (std::size_t i = 0; i < tr.rows.size(); i += std::max<std::size_t>(stride, 1)) {
        write_row(out, tr.rows[i]);
    }
}

/// One line per stack entry: x, u, xdot_bar, sigma_f.
inline void write_stack_csv(std::ostream& out, const std::vector<sysid::HistoryEntry>& stack)
{
    if (stack.empty()) {
        out << "j\n";
        return;
    }
    const auto& f = stack.front();
    std::string h = "j";
    const auto cols = [&h](const std::string& name, Eigen::Index count) {
        for (Eigen::Index i = 1; i <= count; ++i) {
            h += "," + name + "_" + std::to_string(i);
        }
    };
    cols("x", f.x.size());
    cols("u", f.u.size());
    cols("xdot_bar", f.xdot_bar.size());
    cols("sigma_f", f.sigma_f.size());
    out << h << '\n';
    for (std::size_t j = 0; j < stack.size(); ++j) {
        std::string line = std::to_string(j + 1);
        for (const Vector* v : {&stack[j].x, &stack[j].u, &stack[j].xdot_bar, &stack[j].sigma_f}) {
            for (Eigen::Index i = 0; i < v->size(); ++i) {
                line += "," + fmt((*v)(i));
            }
        }
        out << line << '\n';
    }
}

inline nlohmann::ordered_json metrics_json(const sim::Metrics& mt, const sim::Trace& tr)
{
    using J = nlohmann::ordered_json;
    const auto opt = [](const std::optional<double>& v) { return v ? J(*v) : J(nullptr); };
    J j;
    j["rows"] = mt.rows;
    j["diverged"] = mt.diverged;
    j["error"] = tr.error;
    j["tail_rms_e"] = mt.tail_rms_e;
    j["terminal_theta_tilde"] = opt(mt.terminal_theta_tilde);
    j["terminal_Wc_error"] = opt(mt.terminal_Wc_error);
    j["terminal_Wa_error"] = opt(mt.terminal_Wa_error);
    j["max_gamma_norm"] = mt.max_gamma_norm;
    j["min_gamma_eig"] = mt.min_gamma_eig;
    j["min_cbar"] = mt.min_cbar;
    j["min_cbar_after_excitation"] = opt(mt.min_cbar_after_excitation);
    j["excitation_time"] = opt(mt.excitation_time);
    j["final_excitation_level"] = mt.final_excitation_level;
    j["max_abs_delta_tail"] = mt.max_abs_delta_tail;
    j["theta_converged_time"] = opt(mt.theta_converged_time);
    j["V0_max_step_increase"] = mt.V0_max_step_increase;
    j["derivative_error_max"] = mt.derivative_error_max;
    return j;
}

} // namespace adptrack::io

#endif // ADPTRACK_IO_HPP
