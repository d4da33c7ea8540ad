#pragma once
//------------------------------------------------------------------------------
//
//   Copyright 2026 the fdpo authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#include <vector>

namespace fdpo {

/// Phase congruency map of a grayscale image, one value in [0,1] per pixel.
///
/// Frequency-domain log-Gabor bank with 4 scales (minimum wavelength 6,
/// scaling factor 2, sigma/f ratio 0.55) and 4 orientations (angular sigma
/// pi/4/1.2), Butterworth low-pass (cutoff 0.45, order 15), per-orientation
/// Rayleigh noise threshold (k=2, tau from the median amplitude of the
/// smallest-wavelength filter, corrected by 1/1.7), pooled as
/// total energy / (total amplitude + 1e-4).
std::vector<double> phaseCongruency(std::vector<double> const &image, int width, int height);

}  // namespace fdpo
