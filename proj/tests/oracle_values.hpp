// Copyright 2026 The ctxent Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Reference values produced by tests/oracle/oracle.py (40-digit mpmath and
// exact fractions, no shared code with the library). All entropies in bits,
// spin arrangements at alpha = 45 deg.

#pragma once

namespace ctxent::oracle {

inline constexpr double kH_quarter = 0.81127812445913286391;     // H(1/4, 3/4)
inline constexpr double kH_third = 0.91829583405448951479;       // H(1/3, 2/3)
inline constexpr double kM_p_ab = 0.7285533905932737622;         // P(A=up ∧ B=up | m)
inline constexpr double kM_joint = 1.2017520733857122017;        // H(A∧B | m)
inline constexpr double kM_inv_joint = 1.6008760366928561008;    // H(A∧B | m_inv)
inline constexpr double kQ_joint = 0.83420266534379111709;       // H(A∧B | q) = H(A∧B | q_inv)
inline constexpr double kN_inv_A_given_B = 0.68872187554086713609;
inline constexpr double kK_joint = 1.5849625007211561815;        // log2 3
inline constexpr double kK_B_given_A = 0.66666666666666666667;
inline constexpr double kK_inv_joint = 1.5304930567574825246;
inline constexpr double kK_inv_A_given_B = 0.61219722270299300986;

// q joint in observation order (A then B). q_inv in its own observation
// order (B then A) has the same cells.
inline constexpr double kQ_cells[4] = {0.82106694903400564, 0.14087281722163774, 0.0055737921850884958,
                                       0.032486441559268126};

// Six-decimal figures that result from rounding cos^2(pi/8) to 0.85355.
// The exact values above differ from them by up to 1.1e-4.
inline constexpr double kQuotedM_joint = 1.201777;
inline constexpr double kQuotedM_inv_joint = 1.600902;
inline constexpr double kQuotedQ_joint = 0.834100;

}  // namespace ctxent::oracle
