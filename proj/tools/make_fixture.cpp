#include <iostream>

#include <CLI11.hpp>

#include "curvetac/errors.hpp"
#include "curvetac/fixtures.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write a ready-made sensor (mesh, background, config) into a directory"};
  app.name("curvetac-fixture");
  std::string kind = "geltip";
  std::string out;
  int width = 640;
  int height = 480;
  app.add_option("--kind", kind, "geltip | flat")->check(CLI::IsMember({"geltip", "flat"}));
  app.add_option("--out", out, "Output directory")->required();
  app.add_option("--width", width, "Image width")->check(CLI::PositiveNumber);
  app.add_option("--height", height, "Image height")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  try {
    const auto fixture =
        kind == "geltip" ? curvetac::geltip_fixture(width, height) : curvetac::flat_fixture(width, height);
    curvetac::write_fixture(fixture, out);
  } catch (const curvetac::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::cerr << "wrote " << kind << " sensor to " << out << "\n";
  return 0;
}
