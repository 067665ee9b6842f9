#include <chrono>
#include <ctime>
#include <functional>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "storyarcs/pipeline.hpp"

namespace {

std::string timestamp_name() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
  return buf;
}

std::string flag_for(std::string key) {
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  return "--" + key;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Emotional arcs of books: windowed sentiment, SVD modes, Ward clusters, SOM, null corpora"};
  app.require_subcommand(1);

  std::string config_file;
  app.add_option("-c,--config", config_file, "key = value config file; flags override it")
      ->check(CLI::ExistingFile);

  const storyarcs::PipelineConfig defaults;
  std::map<std::string, std::string> overrides;
  for (const auto& [key, value] : storyarcs::config_entries(defaults)) {
    app.add_option_function<std::string>(
           flag_for(key), [&overrides, k = key](const std::string& v) { overrides[k] = v; },
           "default: " + (value.empty() ? std::string("(none)") : value))
        ->group("Configuration");
  }

  using Stage = std::function<void(const storyarcs::PipelineConfig&)>;
  const std::vector<std::tuple<std::string, std::string, Stage>> stages{
      {"ingest", "filter the catalog, strip front/back matter, write token files", storyarcs::run_ingest},
      {"arcs", "compute windowed emotional arcs", storyarcs::run_arcs},
      {"svd", "singular value decomposition into modes", storyarcs::run_svd},
      {"cluster", "Ward hierarchical clustering, cuts and silhouettes", storyarcs::run_cluster},
      {"som", "train the self-organizing map", storyarcs::run_som},
      {"null", "word-salad and Markov null corpora, analysed like the real one", storyarcs::run_null},
      {"report", "download statistics per SVD mode", storyarcs::run_report},
      {"all", "every stage in order", storyarcs::run_pipeline},
  };
  for (const auto& [name, help, fn] : stages) {
    app.add_subcommand(name, help)->fallthrough();
  }

  CLI11_PARSE(app, argc, argv);

  try {
    storyarcs::PipelineConfig config;
    if (!config_file.empty()) storyarcs::load_config_file(config, config_file);
    for (const auto& [key, value] : overrides) storyarcs::set_config_value(config, key, value);
    if (config.name.empty()) config.name = timestamp_name();

    for (const auto& [name, help, fn] : stages) {
      if (app.got_subcommand(name)) {
        fn(config);
        std::cout << name << ": done (" << config.run_dir().string() << ")\n";
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
