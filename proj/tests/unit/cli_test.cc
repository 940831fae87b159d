// Copyright 2026 The C2F Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "c2f/dataset.h"
#include "c2f/image_io.h"
#include "c2f/metrics.h"
#include "c2f/rd_report.h"
#include "cli.h"
#include "doctest.h"

namespace c2f {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out, err;
};

Result Cli(std::vector<std::string> args) {
  args.insert(args.begin(), "c2f");
  std::ostringstream out, err;
  const int code = cli::Run(args, out, err);
  return {code, out.str(), err.str()};
}

// Scratch directory with one tiny trained model and one image.
struct Workspace {
  fs::path dir;
  std::string model, image;
  Workspace() {
    dir = fs::temp_directory_path() / "c2f_cli_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    model = (dir / "m.c2fw").string();
    image = (dir / "img.png").string();
    Rng rng(4);
    WriteImage(SyntheticImage(90, 70, rng), image);
    const Result r = Cli({"train", "--synthetic", "4", "--synthetic-size", "64", "--n-main", "8",
                          "--steps", "2", "--batch", "2", "--patch", "64", "--out", model});
    REQUIRE_MESSAGE(r.code == 0, r.err);
  }
  ~Workspace() { fs::remove_all(dir); }
  std::string Path(const std::string& name) const { return (dir / name).string(); }
};

Workspace& Shared() {
  static Workspace ws;
  return ws;
}

std::string Field(const std::string& text, const std::string& key) {
  std::smatch m;
  if (std::regex_search(text, m, std::regex(key + "=([^ \\n]+)"))) return m[1];
  return "";
}

TEST_CASE("argument errors exit with 2") {
  CHECK(Cli({}).code == 2);
  CHECK(Cli({"frobnicate"}).code == 2);
  CHECK(Cli({"encode", "--model"}).code == 2);
  CHECK(Cli({"train", "--synthetic", "2", "--out", Shared().Path("x.c2fw"), "--lambda",
             "-1"}).code == 2);
  CHECK(Cli({"--help"}).code == 0);
}

TEST_CASE("missing files exit with 3") {
  const Workspace& ws = Shared();
  CHECK(Cli({"encode", "--model", ws.Path("nope.c2fw"), "--input", ws.image, "--output",
             ws.Path("o.c2f")}).code == 3);
  CHECK(Cli({"encode", "--model", ws.model, "--input", ws.Path("nope.png"), "--output",
             ws.Path("o.c2f")}).code == 3);
  CHECK(Cli({"encode", "--model", ws.model, "--input", ws.image, "--output",
             ws.Path("no/such/dir/o.c2f")}).code == 3);
}

TEST_CASE("encode and decode through the command line") {
  const Workspace& ws = Shared();
  const std::string stream = ws.Path("a.c2f"), recon = ws.Path("a.png");
  const Result e = Cli({"encode", "--model", ws.model, "--input", ws.image, "--output", stream});
  REQUIRE_MESSAGE(e.code == 0, e.err);
  const double bpp = std::stod(Field(e.err, "bpp"));
  CHECK(bpp == doctest::Approx(Bpp(fs::file_size(stream), 90, 70)).epsilon(1e-5));
  CHECK(std::stoi(Field(e.err, "width")) == 90);
  const std::string sha = Field(e.err, "latent_sha256");
  CHECK(sha.size() == 64);

  const Result d = Cli({"decode", "--model", ws.model, "--input", stream, "--output", recon,
                        "--expect-latents", sha});
  REQUIRE_MESSAGE(d.code == 0, d.err);
  CHECK(Field(d.err, "latent_sha256") == sha);
  const Image out = ReadImage(recon);
  CHECK(out.width == 90);
  CHECK(out.height == 70);

  CHECK(Cli({"decode", "--model", ws.model, "--input", stream, "--output", recon,
             "--expect-latents", std::string(64, '0')}).code == 4);

  // Stream from another model.
  const std::string other = ws.Path("other.c2fw");
  REQUIRE(Cli({"--seed", "7", "train", "--synthetic", "4", "--synthetic-size", "64", "--n-main", "8",
               "--steps", "1", "--batch", "2", "--patch", "64", "--out",
               other}).code == 0);
  CHECK(Cli({"decode", "--model", other, "--input", stream, "--output", recon}).code == 4);

  // Garbage stream.
  std::ofstream(ws.Path("junk.c2f")) << "not a container";
  CHECK(Cli({"decode", "--model", ws.model, "--input", ws.Path("junk.c2f"), "--output",
             recon}).code == 4);
}

TEST_CASE("eval and bdrate") {
  const Workspace& ws = Shared();
  const Result same = Cli({"eval", "--reference", ws.image, "--distorted", ws.image});
  REQUIRE_MESSAGE(same.code == 0, same.err);
  std::istringstream rows(same.out);
  const auto recs = ReadRdCsv(rows, "eval");
  REQUIRE(recs.size() == 1);
  CHECK(std::isinf(recs[0].psnr_db));

  std::ostringstream csv;
  std::vector<RdRecord> pts;
  const double rates[] = {0.1, 0.2, 0.4, 0.8};
  for (int k = 0; k < 4; ++k) {
    RdRecord r;
    r.codec = "anchor";
    r.image = "i";
    r.bpp = rates[k];
    r.psnr_db = 28 + 3 * k;
    pts.push_back(r);
  }
  WriteRdCsv(csv, pts);
  std::ofstream(ws.Path("anchor.csv")) << csv.str();
  const Result bd = Cli({"bdrate", "--anchor", ws.Path("anchor.csv"), "--test",
                         ws.Path("anchor.csv")});
  REQUIRE_MESSAGE(bd.code == 0, bd.err);
  CHECK(bd.out.find("anchor,") != std::string::npos);
  CHECK(bd.out.find(",0") != std::string::npos);
  CHECK(Cli({"bdrate", "--anchor", ws.Path("anchor.csv"), "--test", ws.Path("anchor.csv"),
             "--anchor-codec", "missing"}).code == 5);
  std::ofstream(ws.Path("bad.csv")) << "codec,image\nx,y\n";
  CHECK(Cli({"bdrate", "--anchor", ws.Path("bad.csv"), "--test", ws.Path("anchor.csv")}).code ==
        5);
  CHECK(Cli({"eval", "--reference", ws.image, "--distorted", ws.Path("nope.png")}).code == 3);
}

}  // namespace
}  // namespace c2f
