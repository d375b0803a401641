import os
import sys

import uvicorn

# Add current directory to path
sys.path.append(os.getcwd())

from app.config.mermin_config import API_CONFIG  # noqa: E402

if __name__ == "__main__":
    uvicorn.run("app.api.main:app", host=API_CONFIG["host"], port=API_CONFIG["port"], reload=API_CONFIG["reload"])
