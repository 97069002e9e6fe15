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
#ifndef ADPTRACK_INTEGRATOR_HPP
#define ADPTRACK_INTEGRATOR_HPP

#include "adptrack/core.hpp"

namespace adptrack {

/// One classical fourth-order Runge-Kutta step of y' = rhs(t, y).
template <typename Rhs>
Vector rk4_step(Rhs&& rhs, double t, const Vector& y, double dt)
{
    const Vector k1 = rhs(t, y);
    const Vector k2 = rhs(t + 0.5 * dt, Vector(y + 0.5 * dt * k1));
    const Vector k3 = rhs(t + 0.5 * dt, Vector(y + 0.5 * dt * k2));
    const Vector k4 = rhs(t + dt, Vector(y + dt * k3));
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

} // namespace adptrack

#endif // ADPTRACK_INTEGRATOR_HPP
