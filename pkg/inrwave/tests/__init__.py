# Tests for inrwave
