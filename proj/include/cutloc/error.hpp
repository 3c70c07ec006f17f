#pragma once

#include <stdexcept>
#include <string>

namespace cutloc {

// Every failure raised by the library derives from Error so callers (the CLI
// in particular) can catch one type and serialize the message.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class TopologyError : public Error {
 public:
  using Error::Error;
};

class MeshMismatchError : public Error {
 public:
  MeshMismatchError() : Error("field and operator belong to different meshes") {}
  using Error::Error;
};

class UnsupportedSurfaceError : public Error {
 public:
  using Error::Error;
};

class AssemblyError : public Error {
 public:
  using Error::Error;
};

class ConstructionError : public Error {
 public:
  using Error::Error;
};

}  // namespace cutloc
