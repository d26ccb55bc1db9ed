import awesome_progress_bar


class ChainProgress:
    """
    Progress of an MCMC run, labelled with its phase and running acceptance.

    The message is refreshed every `refresh` iterations; the bar itself
    advances on every step.
    """

    def __init__(
        self,
        total: int,
        n_burnin: int = 0,
        *,
        show: bool = True,
        prefix: str = "",
        refresh: int = 100,
    ) -> None:
        self.total = total
        self.n_burnin = n_burnin
        self.refresh = max(1, refresh)
        self.done = 0
        self.message = ""
        self.show = show and total > 0
        if self.show:
            self.bar = awesome_progress_bar.ProgressBar(
                prefix=prefix,
                total=total,
                bar_length=30,
                use_thread=False,
                use_spinner=False,
            )

    def step(self, accepted: int = 0) -> None:
        self.done += 1
        if self.done % self.refresh == 0 or self.done == self.total:
            phase = "burn-in" if self.done <= self.n_burnin else "sampling"
            rate = accepted / self.done
            # Pad so a shorter message fully overwrites the last one.
            self.message = f"{phase} acc {rate:.2f}".ljust(len(self.message))
        if self.show:
            self.bar.iter(self.message)
