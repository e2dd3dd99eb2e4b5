#!/usr/bin/env python3
# -*- coding:UTF-8 -*-
#
# Copyright (C) 2026 Junbo Zheng. All rights reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#

"""Exception types shared by the library and the command line."""


class PseudocellError(Exception):
    """Base error; ``exit_code`` is what the CLI returns for it."""

    exit_code = 2


class InputError(PseudocellError, ValueError):
    """Bad input file, record or parameter."""

    exit_code = 1


class InvariantError(PseudocellError, RuntimeError):
    """An internal invariant did not hold."""

    exit_code = 2
