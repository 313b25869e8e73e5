// Exercises the installed command-line binary end to end: exit codes, basic
// artifact creation, and the eval path. Run as: cli_smoke <path-to-binary>.

#include <cstdio>
#include <cstdlib>
#include <sys/wait.h>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "gdnet/sar_image.hpp"

namespace fs = std::filesystem;

namespace {

int failures = 0;

int run(const std::string& cmd) {
  const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
  if (status == -1) return -1;
#ifdef _WIN32
  return status;
#else
  return WEXITSTATUS(status);
#endif
}

void expect(bool ok, const std::string& what) {
  if (ok) {
    std::cout << "[ok] " << what << "\n";
  } else {
    std::cout << "[FAILED] " << what << "\n";
    ++failures;
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: cli_smoke <gdnet-binary>\n";
    return 2;
  }
  const std::string bin = argv[1];
  const fs::path work = fs::temp_directory_path() / "gdnet_cli_smoke";
  fs::remove_all(work);
  fs::create_directories(work);
  const std::string w = work.string();

  // Usage errors exit with 2.
  expect(run(bin) == 2, "no subcommand exits 2");
  expect(run(bin + " frobnicate") == 2, "unknown subcommand exits 2");
  expect(run(bin + " --help") == 0, "--help exits 0");
  expect(run(bin + " summary --help") == 0, "subcommand --help exits 0");

  // Bad config key exits with 2.
  {
    const std::string cfg = w + "/bad.cfg";
    std::ofstream out(cfg);
    out << "epcohs = 50\n";
    out.close();
    expect(run(bin + " summary --config " + cfg) == 2,
           "unknown config key exits 2");
  }
  {
    const std::string cfg = w + "/badtype.cfg";
    std::ofstream out(cfg);
    out << "epochs = abc\n";
    out.close();
    expect(run(bin + " summary --config " + cfg) == 2,
           "mistyped config value exits 2");
  }

  // Missing input image exits with 1 (runtime error, not usage).
  expect(run(bin + " preclassify --t1 " + w + "/nope1.pgm --t2 " + w +
             "/nope2.pgm --output_dir " + w) == 1,
         "missing input image exits 1");

  // summary prints the counting convention and parameters.
  expect(run(bin + " summary --output_dir " + w) == 0,
         "summary succeeds with defaults");

  // Identical prediction and ground truth score PCC 100.
  {
    gdnet::ChangeMap map;
    map.width = 8;
    map.height = 8;
    map.cells.assign(64, 0);
    for (std::size_t i = 0; i < 16; ++i) map.cells[i] = 1;
    const std::string pred = w + "/pred.pgm";
    const std::string gt = w + "/gt.pgm";
    gdnet::write_change_map(map, pred);
    gdnet::write_change_map(map, gt);
    const std::string out_dir = w + "/eval_out";
    expect(run(bin + " eval --prediction " + pred + " --ground_truth " + gt +
               " --output_dir " + out_dir) == 0,
           "eval on identical maps exits 0");

    std::ifstream report(out_dir + "/report.txt");
    std::string text((std::istreambuf_iterator<char>(report)),
                     std::istreambuf_iterator<char>());
    expect(text.find("pcc_percent = 100.0000") != std::string::npos,
           "identical maps score PCC 100.0000");
    expect(fs::exists(out_dir + "/config_resolved.txt"),
           "eval writes the resolved config");
  }

  // synth produces a readable scene triple.
  {
    const std::string out_dir = w + "/synth_out";
    expect(run(bin + " synth --width 64 --height 64 --output_dir " + out_dir +
               " --seed 5") == 0,
           "synth exits 0");
    expect(fs::exists(out_dir + "/t1.pgm") && fs::exists(out_dir + "/t2.pgm") &&
               fs::exists(out_dir + "/ground_truth.pgm"),
           "synth writes t1, t2 and ground truth");
  }

  fs::remove_all(work);
  if (failures != 0) {
    std::cout << failures << " smoke check(s) failed\n";
    return 1;
  }
  std::cout << "all smoke checks passed\n";
  return 0;
}
