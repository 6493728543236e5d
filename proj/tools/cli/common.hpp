#pragma once

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>

#include "capcurate/jsonl.hpp"

namespace capcurate::cli {

void add_dataset(CLI::App& app);
void add_annotate(CLI::App& app);
void add_stats(CLI::App& app);
void add_eval(CLI::App& app);
void add_mix(CLI::App& app);
void add_scaling(CLI::App& app);
void add_pack(CLI::App& app);
void add_evalsvc(CLI::App& app);

// Pretty JSON to `out`, or to stdout when `out` is empty.
void emit(const Json& value, const std::string& out);

// Everything that is not a result goes to stderr.
inline std::ostream& log() { return std::cerr; }

}  // namespace capcurate::cli
