#include <CLI11.hpp>

#include "capcurate/error.hpp"
#include "common.hpp"

namespace capcurate::cli {

void emit(const Json& value, const std::string& out) {
  const std::string text = value.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    atomic_write_file(out, text);
    log() << "wrote " << out << "\n";
  }
}

}  // namespace capcurate::cli

int main(int argc, char** argv) {
  CLI::App app{"capcurate: caption corpus curation toolkit"};
  app.require_subcommand(1);
  capcurate::cli::add_dataset(app);
  capcurate::cli::add_annotate(app);
  capcurate::cli::add_stats(app);
  capcurate::cli::add_eval(app);
  capcurate::cli::add_mix(app);
  capcurate::cli::add_scaling(app);
  capcurate::cli::add_pack(app);
  capcurate::cli::add_evalsvc(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const capcurate::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
