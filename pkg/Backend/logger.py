# -*- coding: utf-8 -*-
"""
Logging system for the vr3c solver
Echoes to the terminal (stderr) and keeps per-session run and solver log files
"""

import json
import sys
import threading
from datetime import datetime
from pathlib import Path
from typing import Dict, Any, Optional

from . import settings


class Logger:
    """Terminal + file logger for solver runs"""

    LOG_DIR = None
    RUNLOGS_DIR = None
    SOLVERLOGS_DIR = None
    RUN_LOG_FILE = None
    SOLVER_LOG_FILE = None

    # File handles stay open for the session
    _run_log_handle = None
    _solver_log_handle = None
    _initialized = False
    _to_file = True
    _lock = threading.Lock()

    quiet = False

    @classmethod
    def init(cls, log_dir: Optional[Path] = None, to_file: Optional[bool] = None):
        """Initialize log directories and session files"""
        with cls._lock:
            if cls._initialized:
                return
            cls._initialized = True
            cls.quiet = cls.quiet or settings.log_quiet()
            cls._to_file = settings.log_to_file() if to_file is None else to_file
            if not cls._to_file:
                return

            cls.LOG_DIR = Path(log_dir) if log_dir else settings.log_dir()
            cls.RUNLOGS_DIR = cls.LOG_DIR / "Run Logs"
            cls.SOLVERLOGS_DIR = cls.LOG_DIR / "Solver Logs"

            try:
                cls.RUNLOGS_DIR.mkdir(parents=True, exist_ok=True)
                cls.SOLVERLOGS_DIR.mkdir(parents=True, exist_ok=True)

                session_timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
                cls.RUN_LOG_FILE = cls.RUNLOGS_DIR / f"run_log_{session_timestamp}.txt"
                cls.SOLVER_LOG_FILE = cls.SOLVERLOGS_DIR / f"solver_log_{session_timestamp}.txt"

                # buffering=1 is line-buffered
                cls._run_log_handle = open(cls.RUN_LOG_FILE, "a", encoding="utf-8", buffering=1)
                cls._solver_log_handle = open(cls.SOLVER_LOG_FILE, "a", encoding="utf-8", buffering=1)
            except OSError as e:
                cls._to_file = False
                print(f"Failed to open log files in {cls.LOG_DIR}: {e}", file=sys.stderr)

    @classmethod
    def close(cls):
        """Close all open log file handles"""
        with cls._lock:
            for handle in (cls._run_log_handle, cls._solver_log_handle):
                if handle and not handle.closed:
                    handle.close()
            cls._run_log_handle = None
            cls._solver_log_handle = None
            cls._initialized = False

    @classmethod
    def _write(cls, handle, line: str):
        try:
            if handle and not handle.closed:
                handle.write(line + "\n")
        except (OSError, ValueError) as e:
            print(f"Failed to write to log file: {e}", file=sys.stderr)

    @classmethod
    def log(cls, message: str, log_type: str = "INFO"):
        """Log message to terminal and run log file"""
        if not cls._initialized:
            cls.init()

        timestamp = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
        formatted_msg = f"[{timestamp}] [{log_type}] {message}"

        if not cls.quiet:
            print(formatted_msg, file=sys.stderr)
        cls._write(cls._run_log_handle, formatted_msg)

    @classmethod
    def log_solver_call(cls, function_name: str, args: Dict[str, Any]):
        """Log a solver invocation with its arguments"""
        if not cls._initialized:
            cls.init()

        timestamp = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
        msg = f"[{timestamp}] SOLVER_CALL: {function_name} | Args: {json.dumps(args, indent=2, default=str)}"
        cls._write(cls._solver_log_handle, msg)

        cls.log(f"Solver Call: {function_name}", "SOLVER_CALL")

    @classmethod
    def log_solver_result(cls, function_name: str, result: Dict[str, Any]):
        """Log a solver result summary"""
        if not cls._initialized:
            cls.init()

        timestamp = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
        msg = f"[{timestamp}] SOLVER_RESULT: {function_name} | Result: {json.dumps(result, indent=2, default=str)}"
        cls._write(cls._solver_log_handle, msg)

        cls.log(f"Solver Result: {function_name}", "SOLVER_RESULT")

    @classmethod
    def log_solver_status(cls, function_name: str, status: str, details: str = ""):
        """Log solver status (started, success, failure, capped)"""
        if not cls._initialized:
            cls.init()

        timestamp = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
        msg = f"[{timestamp}] SOLVER_STATUS: {function_name} | Status: {status}"
        if details:
            msg += f" | Details: {details}"
        cls._write(cls._solver_log_handle, msg)

        cls.log(msg, "SOLVER_STATUS")
