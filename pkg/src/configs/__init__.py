﻿
