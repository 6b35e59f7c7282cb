import logging
import sys
from datetime import datetime
from typing import Dict, Any
import json

from config import Config


class NodalNetLogger:
    """Custom logger for NodalNet with run metrics"""

    def __init__(self, name: str = "nodalnet"):
        self.logger = logging.getLogger(name)
        self.logger.setLevel(Config.LOG_LEVEL)

        # Handlers sit on the root logger so library modules logging through
        # logging.getLogger(__name__) share them; attach once per process
        root = logging.getLogger()
        if not getattr(root, "_nodalnet_configured", False):
            root.setLevel(Config.LOG_LEVEL)
            formatter = logging.Formatter(
                '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
            )

            # Console handler on stderr, stdout carries JSON/CSV
            console_handler = logging.StreamHandler(sys.stderr)
            console_handler.setLevel(Config.LOG_LEVEL)
            console_handler.setFormatter(formatter)
            root.addHandler(console_handler)

            if Config.LOG_FILE:
                file_handler = logging.FileHandler(Config.LOG_FILE)
                file_handler.setLevel(logging.DEBUG)
                file_handler.setFormatter(formatter)
                root.addHandler(file_handler)

            root._nodalnet_configured = True

        # Metrics storage
        self.metrics = {
            'stage_calls': {},
            'timings': {},
            'errors': [],
        }

    def log_stage(self, stage: str, action: str, data: Dict = None):
        """Log pipeline stage activity"""
        self.logger.info(f"Stage: {stage} | Action: {action}")

        if stage not in self.metrics['stage_calls']:
            self.metrics['stage_calls'][stage] = 0
        self.metrics['stage_calls'][stage] += 1

        if data:
            self.logger.debug(f"Data: {json.dumps(data, indent=2, default=str)}")

    def log_timing(self, name: str, seconds: float):
        """Log wall-clock time of a stage"""
        self.logger.info(f"Timing: {name} | Time: {seconds:.2f}s")
        self.metrics['timings'].setdefault(name, []).append(seconds)

    def log_error(self, error: Exception, context: str = ""):
        """Log errors"""
        self.logger.error(f"Error in {context}: {str(error)}")
        self.metrics['errors'].append({
            'timestamp': datetime.now().isoformat(),
            'context': context,
            'error': type(error).__name__,
            'message': str(error),
        })

    def get_metrics(self) -> Dict[str, Any]:
        """Get aggregated metrics"""
        total_time = sum(sum(v) for v in self.metrics['timings'].values())
        return {
            'total_stage_calls': sum(self.metrics['stage_calls'].values()),
            'stage_breakdown': dict(self.metrics['stage_calls']),
            'timings': {k: sum(v) for k, v in self.metrics['timings'].items()},
            'total_time': total_time,
            'total_errors': len(self.metrics['errors']),
        }

    def print_summary(self):
        """Print execution summary to stderr"""
        metrics = self.get_metrics()
        out = sys.stderr

        print("\n" + "=" * 60, file=out)
        print("EXECUTION SUMMARY", file=out)
        print("=" * 60, file=out)
        print(f"Total Stage Calls: {metrics['total_stage_calls']}", file=out)
        print(f"Total Time: {metrics['total_time']:.2f}s", file=out)
        print(f"Total Errors: {metrics['total_errors']}", file=out)
        print("\nStage Breakdown:", file=out)
        for stage, count in metrics['stage_breakdown'].items():
            seconds = metrics['timings'].get(stage, 0.0)
            print(f"  {stage}: {count} calls, {seconds:.2f}s", file=out)
        print("=" * 60, file=out)
