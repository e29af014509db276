// Browser entry point: same-origin API, live document.

import { ApiClient } from "./api";
import { boot } from "./main";

const viewer = boot(document, new ApiClient(""));
void viewer.start();
