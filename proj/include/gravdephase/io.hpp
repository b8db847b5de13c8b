#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gravdephase/emission.hpp"
#include "gravdephase/modes.hpp"
#include "gravdephase/spectrum.hpp"

namespace gd {

/// Shortest round-trip text for a double ("%.17g").
std::string format_double(double v);

/// Header of every spectrum CSV.
inline constexpr const char* kSpectrumCsvHeader = "method,a,k_z,re_amp,im_amp,prob,stderr";

/// Appends one row per grid point; stderr is empty for methods that have none.
void write_spectrum_rows(std::ostream& out, const AngularSpectrum& spectrum);

/// One atom per row (x, y, z) after a "# seed: N" comment line.
void write_ensemble_csv(std::ostream& out, const Ensemble& ensemble);

/// Reads positions written by write_ensemble_csv. Atoms take their transition
/// data from `prototype`; the box is the bounding box of `box`.
Ensemble read_ensemble_csv(std::istream& in, const Atom& prototype, const Box& box);

/// Mode test vectors: k, s, z, then real/imaginary parts of alpha, Theta, f and p.
inline constexpr const char* kModeVectorHeader =
    "kx,ky,kz,s,a,z,alpha,theta,f1_re,f1_im,f2_re,f2_im,f3_re,f3_im,p1_re,p1_im,p2_re,p2_im,p3_re,"
    "p3_im";

void write_mode_vector_row(std::ostream& out, const PerturbedMode& mode, double z);

/// Writes `text` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace gd
