#include "sweeplio/csv_io.hpp"

#include <cstring>

#include "sweeplio/errors.hpp"

namespace sweeplio {

namespace {

std::FILE* open_or_throw(const std::string& path, const char* mode) {
  std::FILE* f = std::fopen(path.c_str(), mode);
  if (!f) throw IoError("cannot open " + path);
  return f;
}

void expect_header(std::FILE* f, const char* expected,
                   const std::string& path) {
  char line[256];
  if (!std::fgets(line, sizeof(line), f)) {
    std::fclose(f);
    throw IoError("empty file: " + path);
  }
  line[std::strcspn(line, "\r\n")] = '\0';
  if (std::strcmp(line, expected) != 0) {
    std::fclose(f);
    throw IoError("unexpected header in " + path + ": got '" + line +
                  "', expected '" + expected + "'");
  }
}

}  // namespace

std::vector<ImuSample> read_imu_csv(const std::string& path) {
  std::FILE* f = open_or_throw(path, "r");
  expect_header(f, "t,ax,ay,az,gx,gy,gz", path);
  std::vector<ImuSample> out;
  ImuSample s;
  double v[7];
  long line = 1;
  while (true) {
    const int n = std::fscanf(f, "%lf,%lf,%lf,%lf,%lf,%lf,%lf\n", &v[0],
                              &v[1], &v[2], &v[3], &v[4], &v[5], &v[6]);
    if (n == EOF) break;
    ++line;
    if (n != 7) {
      std::fclose(f);
      throw IoError("malformed IMU row at " + path + ":" +
                    std::to_string(line));
    }
    s.timestamp = v[0];
    s.accel = Vec3(v[1], v[2], v[3]);
    s.gyro = Vec3(v[4], v[5], v[6]);
    out.push_back(s);
  }
  std::fclose(f);
  return out;
}

void write_imu_csv(const std::string& path, std::span<const ImuSample> rows) {
  std::FILE* f = open_or_throw(path, "w");
  std::fputs("t,ax,ay,az,gx,gy,gz\n", f);
  for (const ImuSample& s : rows) {
    std::fprintf(f, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                 s.timestamp, s.accel.x(), s.accel.y(), s.accel.z(),
                 s.gyro.x(), s.gyro.y(), s.gyro.z());
  }
  std::fclose(f);
}

std::vector<SweepBoundary> read_sweeps_csv(const std::string& path) {
  std::FILE* f = open_or_throw(path, "r");
  expect_header(f, "sweep_id,t_begin,t_end", path);
  std::vector<SweepBoundary> out;
  long id;
  double b, e;
  long line = 1;
  while (true) {
    const int n = std::fscanf(f, "%ld,%lf,%lf\n", &id, &b, &e);
    if (n == EOF) break;
    ++line;
    if (n != 3) {
      std::fclose(f);
      throw IoError("malformed sweep row at " + path + ":" +
                    std::to_string(line));
    }
    out.push_back({id, b, e});
  }
  std::fclose(f);
  return out;
}

void write_sweeps_csv(const std::string& path,
                      std::span<const SweepBoundary> rows) {
  std::FILE* f = open_or_throw(path, "w");
  std::fputs("sweep_id,t_begin,t_end\n", f);
  for (const SweepBoundary& s : rows) {
    std::fprintf(f, "%ld,%.12g,%.12g\n", s.sweep_id, s.t_begin, s.t_end);
  }
  std::fclose(f);
}

std::vector<TimedPoint> read_points_csv(const std::string& path) {
  PointsCsvReader reader(path);
  std::vector<TimedPoint> out;
  TimedPoint p;
  while (reader.next(p)) out.push_back(p);
  return out;
}

void write_points_csv(const std::string& path,
                      std::span<const TimedPoint> rows) {
  PointsCsvWriter writer(path);
  for (const TimedPoint& p : rows) writer.write(p);
}

PointsCsvReader::PointsCsvReader(const std::string& path) : path_(path) {
  file_ = open_or_throw(path, "r");
  expect_header(file_, "t,x,y,z", path);
}

PointsCsvReader::~PointsCsvReader() {
  if (file_) std::fclose(file_);
}

bool PointsCsvReader::next(TimedPoint& out) {
  double v[4];
  const int n =
      std::fscanf(file_, "%lf,%lf,%lf,%lf\n", &v[0], &v[1], &v[2], &v[3]);
  if (n == EOF) return false;
  ++line_;
  if (n != 4) {
    throw IoError("malformed point row at " + path_ + ":" +
                  std::to_string(line_));
  }
  out.timestamp = v[0];
  out.position = Vec3(v[1], v[2], v[3]);
  return true;
}

PointsCsvWriter::PointsCsvWriter(const std::string& path) {
  file_ = open_or_throw(path, "w");
  std::fputs("t,x,y,z\n", file_);
}

PointsCsvWriter::~PointsCsvWriter() {
  if (file_) std::fclose(file_);
}

void PointsCsvWriter::write(const TimedPoint& p) {
  std::fprintf(file_, "%.12g,%.12g,%.12g,%.12g\n", p.timestamp,
               p.position.x(), p.position.y(), p.position.z());
}

}  // namespace sweeplio
