// Copyright 2026 The Geopool Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GEOPOOL_INGEST_HTTP_SERVER_H_
#define GEOPOOL_INGEST_HTTP_SERVER_H_

#include <memory>
#include <string>

#include "geopool/ingest/service.h"

namespace httplib {
class Server;
}

namespace geopool::ingest {

// Plain HTTP/1.1 front end for a Service. TLS is left to a reverse proxy.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  // Binds `host`; port 0 picks a free port. Returns the bound port. Throws
  // kUnavailable if the address cannot be bound.
  int Bind(const std::string& host, int port);
  // Serves until Stop(). Call after Bind().
  void Run();
  void Stop();

 private:
  Service& service_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace geopool::ingest

#endif  // GEOPOOL_INGEST_HTTP_SERVER_H_
