#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "optmix/diagnostics.hpp"
#include "optmix/fields.hpp"

namespace optmix {

/// Header: t,mix_norm,mix_norm_normalized,l2,linf,energy,enstrophy,
/// instantaneous_rate,lower_bound,gamma. Values printed with %.17g so a
/// re-run reproduces the file byte for byte.
void write_diagnostics_csv(std::ostream& os,
                           const std::vector<DiagnosticsRecord>& series);
void write_diagnostics_csv_file(const std::string& path,
                                const std::vector<DiagnosticsRecord>& series);

/// Row-major grid CSV with a commented header describing the rectangle.
void write_grid_snapshot(std::ostream& os, const ScalarField& field, double time,
                         const std::string& name);
ScalarField read_grid_snapshot(std::istream& is, std::shared_ptr<Domain>& domain,
                               double& time, std::string& name);

/// Legacy-VTK ASCII unstructured grid with one point scalar.
void write_vtk_snapshot(std::ostream& os, const ScalarField& field, double time,
                        const std::string& name);
ScalarField read_vtk_snapshot(std::istream& is, std::shared_ptr<Domain>& domain,
                              double& time, std::string& name);

/// Writes the appropriate snapshot format for the field's domain to
/// `<dir>/<name>_t<time>.csv|.vtk` and returns the path.
std::string write_snapshot_file(const std::string& dir, const ScalarField& field,
                                double time, const std::string& name);

}  // namespace optmix
